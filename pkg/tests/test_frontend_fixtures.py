"""Pins the web client's recorded wire strings to the broker's own encoder.

The browser UI serializes request bodies itself and its test suite compares
them byte for byte against frontend/test/fixtures.json. Regenerating every
fixture string here means the two implementations cannot drift apart
silently.
"""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from sembus.broker import Broker, BrokerConfig
from sembus.model import canonical_json

from .conftest import (
    CANDIDATE_EVENT,
    DEMO_YEAR,
    JOB_ONTOLOGY_PATH,
    RECRUITER_SUB,
    RESUME_EVENT,
)

FIXTURES_PATH = (
    Path(__file__).resolve().parent.parent / "frontend" / "test" / "fixtures.json"
)

# The UI tests register no real client; they pin request wrappers to this id.
UI_CLIENT_ID = "cli-000000000001"


@pytest.fixture(scope="module")
def fixtures() -> dict[str, str]:
    return json.loads(FIXTURES_PATH.read_text(encoding="utf-8"))


def test_document_fixtures_match_canonical_encoding(fixtures):
    assert fixtures["subscription_S"] == canonical_json(RECRUITER_SUB)
    assert fixtures["event_E"] == canonical_json(CANDIDATE_EVENT)
    assert fixtures["event_E2"] == canonical_json(RESUME_EVENT)


def test_request_wrapper_fixtures_match_canonical_encoding(fixtures):
    subscribe = {"client_id": UI_CLIENT_ID, "subscription": RECRUITER_SUB}
    publish = {"client_id": UI_CLIENT_ID, "event": CANDIDATE_EVENT}
    assert fixtures["subscribe_request"] == canonical_json(subscribe)
    assert fixtures["publish_request"] == canonical_json(publish)


def test_notification_fixture_matches_live_broker(fixtures):
    config = BrokerConfig(ontology_paths=(JOB_ONTOLOGY_PATH,),
                          current_year=DEMO_YEAR)
    broker = Broker(config)
    try:
        recruiter = broker.register_client("recruiter", "queue")
        candidate = broker.register_client("candidate", "queue")
        broker.subscribe(recruiter.client_id, RECRUITER_SUB)
        broker.publish(candidate.client_id, CANDIDATE_EVENT)
        docs = broker.drain_notifications(recruiter.client_id)
    finally:
        broker.close()

    assert len(docs) == 1
    doc = dict(docs[0])
    recorded = json.loads(fixtures["notification_E_S"])
    # Client ids are freshly minted each run; everything else must agree.
    doc["subscriber"] = recorded["subscriber"]
    doc["publisher"] = recorded["publisher"]
    assert canonical_json(doc) == fixtures["notification_E_S"]
