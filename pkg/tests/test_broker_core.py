"""Broker behavior: routing modes, the append-only log, crash recovery, and
the three delivery transports."""

from __future__ import annotations

import json

import pytest

from sembus.broker import Broker, BrokerConfig, Mode, Transport
from sembus.broker.core import LOG_FILE, UnknownClient
from sembus.matcher import DuplicateSubscription
from sembus.model import canonical_json

from .conftest import (
    CANDIDATE_EVENT,
    DEMO_YEAR,
    JOB_ONTOLOGY_PATH,
    RECRUITER_SUB,
    free_port,
)


def make_broker(tmp_path=None, **overrides) -> Broker:
    cfg = BrokerConfig(
        ontology_paths=(JOB_ONTOLOGY_PATH,),
        current_year=DEMO_YEAR,
        data_dir=tmp_path,
        **overrides,
    )
    return Broker(cfg)


def queue_client(broker: Broker, name: str = "c"):
    return broker.register_client(name, Transport.QUEUE)


class TestRouting:
    def test_semantic_match_and_exactly_once_drain(self):
        b = make_broker()
        try:
            c = queue_client(b)
            s = b.subscribe(c.client_id, RECRUITER_SUB)
            receipt = b.publish(c.client_id, CANDIDATE_EVENT)
            assert receipt == {"event_id": "E", "matched_count": 1}
            got = b.drain_notifications(c.client_id)
            assert len(got) == 1
            n = got[0]
            assert n["event_id"] == "E" and n["sub_id"] == s.sub_id
            assert n["dedupe_key"] == "E:S"
            assert any(r["stage"] == "mapping" for r in n["trace"])
            assert b.drain_notifications(c.client_id) == []
        finally:
            b.close()

    def test_syntactic_mode_matches_nothing_derived(self):
        b = make_broker(mode="syntactic")
        try:
            c = queue_client(b)
            b.subscribe(c.client_id, RECRUITER_SUB)
            receipt = b.publish(c.client_id, CANDIDATE_EVENT)
            assert receipt["matched_count"] == 0
        finally:
            b.close()

    def test_mode_switch_changes_routing(self):
        b = make_broker()
        try:
            c = queue_client(b)
            b.subscribe(c.client_id, RECRUITER_SUB)
            assert b.publish(c.client_id, CANDIDATE_EVENT)["matched_count"] == 1
            b.set_mode(Mode.SYNTACTIC)
            assert b.publish(c.client_id, CANDIDATE_EVENT)["matched_count"] == 0
            b.set_mode("semantic")
            assert b.publish(c.client_id, CANDIDATE_EVENT)["matched_count"] == 1
        finally:
            b.close()

    def test_subscription_normalized_only_in_semantic_mode(self):
        b = make_broker()
        try:
            c = queue_client(b)
            s = b.subscribe(c.client_id,
                            {"sub_id": "a", "predicates": [["school", "=", "X"]]})
            assert s.predicates[0].attribute == "university"
            b.set_mode(Mode.SYNTACTIC)
            s2 = b.subscribe(c.client_id,
                             {"sub_id": "b", "predicates": [["school", "=", "X"]]})
            assert s2.predicates[0].attribute == "school"
        finally:
            b.close()

    def test_unknown_client_rejected(self):
        b = make_broker()
        try:
            with pytest.raises(UnknownClient):
                b.subscribe("cli-nope", RECRUITER_SUB)
            with pytest.raises(UnknownClient):
                b.publish("cli-nope", CANDIDATE_EVENT)
            with pytest.raises(UnknownClient):
                b.drain_notifications("cli-nope")
        finally:
            b.close()

    def test_duplicate_subscription_id_rejected(self):
        b = make_broker()
        try:
            c = queue_client(b)
            b.subscribe(c.client_id, RECRUITER_SUB)
            with pytest.raises(DuplicateSubscription):
                b.subscribe(c.client_id, RECRUITER_SUB)
        finally:
            b.close()

    def test_unsubscribe_stops_notifications(self):
        b = make_broker()
        try:
            c = queue_client(b)
            s = b.subscribe(c.client_id, RECRUITER_SUB)
            assert b.unsubscribe(s.sub_id) is True
            assert b.unsubscribe(s.sub_id) is False
            assert b.publish(c.client_id, CANDIDATE_EVENT)["matched_count"] == 0
        finally:
            b.close()

    def test_status_counters(self):
        b = make_broker()
        try:
            c = queue_client(b)
            b.subscribe(c.client_id, RECRUITER_SUB)
            b.publish(c.client_id, CANDIDATE_EVENT)
            st = b.status()
            assert st["mode"] == "semantic"
            assert st["clients"] == 1
            assert st["subscriptions"] == 1
            assert st["events_published"] == 1
            assert st["notifications_sent"] == 1
            assert st["current_year"] == DEMO_YEAR
            assert st["ontology"]["domains"] == ["job-finder"]
            assert len(st["ontology"]["digest"]) == 16
        finally:
            b.close()


class TestPersistence:
    def test_restart_preserves_clients_subs_and_mode(self, tmp_path):
        b = make_broker(tmp_path)
        c = queue_client(b)
        s = b.subscribe(c.client_id, RECRUITER_SUB)
        b.set_mode(Mode.SYNTACTIC)
        b.close()

        b2 = make_broker(tmp_path)
        try:
            assert b2.mode is Mode.SYNTACTIC
            assert b2.client(c.client_id).transport is Transport.QUEUE
            stored = b2.index.get(s.sub_id)
            assert stored is not None
            # Normalization happened at subscribe time and survives replay
            # verbatim, independent of the mode active at restart.
            assert stored.predicates[0].attribute == "university"
            assert stored.subscriber == c.client_id
        finally:
            b2.close()

    def test_undelivered_queue_notifications_survive_restart(self, tmp_path):
        b = make_broker(tmp_path)
        c = queue_client(b)
        b.subscribe(c.client_id, RECRUITER_SUB)
        b.publish(c.client_id, CANDIDATE_EVENT)
        b.close()  # never drained

        b2 = make_broker(tmp_path)
        got = b2.drain_notifications(c.client_id)
        assert [n["dedupe_key"] for n in got] == ["E:S"]
        b2.close()

        b3 = make_broker(tmp_path)
        try:
            # The drain above was confirmed to the log, so nothing replays.
            assert b3.drain_notifications(c.client_id) == []
        finally:
            b3.close()

    def test_corrupt_log_lines_are_skipped_and_counted(self, tmp_path):
        b = make_broker(tmp_path)
        c = queue_client(b)
        b.subscribe(c.client_id, RECRUITER_SUB)
        b.close()

        log = tmp_path / LOG_FILE
        with log.open("a", encoding="utf-8") as f:
            f.write("not json at all\n")
            f.write('[1, 2, 3]\n')
            f.write('{"no_type_field": true}\n')
            f.write('{"type": "subscription"}\n')  # well-formed, wrong shape
        b2 = make_broker(tmp_path)
        try:
            assert b2.status()["log_lines_skipped"] == 4
            assert b2.status()["subscriptions"] == 1
            assert b2.publish(c.client_id, CANDIDATE_EVENT)["matched_count"] == 1
        finally:
            b2.close()

    def test_log_is_canonical_jsonl(self, tmp_path):
        b = make_broker(tmp_path)
        c = queue_client(b)
        b.subscribe(c.client_id, RECRUITER_SUB)
        b.publish(c.client_id, CANDIDATE_EVENT)
        b.drain_notifications(c.client_id)
        b.close()
        lines = (tmp_path / LOG_FILE).read_text().splitlines()
        kinds = [json.loads(l)["type"] for l in lines]
        assert kinds == ["client", "subscription", "notification", "delivered"]
        for line in lines:
            assert line == canonical_json(json.loads(line))


class TestTransports:
    def test_webhook_delivery(self, webhook_sink):
        url, received = webhook_sink
        b = make_broker()
        try:
            pub = queue_client(b, "pub")
            hook = b.register_client("hook", Transport.WEBHOOK, webhook_url=url)
            b.subscribe(hook.client_id, RECRUITER_SUB)
            b.publish(pub.client_id, CANDIDATE_EVENT)
            b.delivery.join()
            assert len(received) == 1
            doc = json.loads(received[0])
            assert doc["dedupe_key"] == "E:S"
            assert doc["delivered_via"] == "webhook"
        finally:
            b.close()

    def test_webhook_failure_goes_to_dead_letters(self, tmp_path):
        dead_url = f"http://127.0.0.1:{free_port()}/hook"
        b = make_broker(tmp_path)
        pub = queue_client(b, "pub")
        hook = b.register_client("hook", Transport.WEBHOOK, webhook_url=dead_url)
        b.subscribe(hook.client_id, RECRUITER_SUB)
        b.publish(pub.client_id, CANDIDATE_EVENT)
        b.delivery.join()
        letters = b.delivery.dead_letters()
        assert len(letters) == 1
        assert letters[0]["attempts"] == 3
        assert letters[0]["url"] == dead_url
        assert b.status()["dead_letters"] == 1
        b.close()

        b2 = make_broker(tmp_path)
        try:
            # Parked entries are restored on replay, not retried.
            assert b2.status()["dead_letters"] == 1
            assert b2.delivery.dead_letters()[0]["notification"][
                "dedupe_key"] == "E:S"
        finally:
            b2.close()

    def test_webhook_success_not_redelivered_after_restart(self, tmp_path,
                                                           webhook_sink):
        url, received = webhook_sink
        b = make_broker(tmp_path)
        pub = queue_client(b, "pub")
        hook = b.register_client("hook", Transport.WEBHOOK, webhook_url=url)
        b.subscribe(hook.client_id, RECRUITER_SUB)
        b.publish(pub.client_id, CANDIDATE_EVENT)
        b.delivery.join()
        b.close()
        assert len(received) == 1

        b2 = make_broker(tmp_path)
        b2.delivery.join()
        b2.close()
        assert len(received) == 1

    def test_stream_listener_receives_live_notification(self):
        b = make_broker()
        try:
            pub = queue_client(b, "pub")
            watcher = b.register_client("watch", Transport.STREAM)
            b.subscribe(watcher.client_id, RECRUITER_SUB)
            listener = b.delivery.open_stream(watcher.client_id)
            b.publish(pub.client_id, CANDIDATE_EVENT)
            doc = listener.get(timeout=2)
            assert doc["dedupe_key"] == "E:S"
            assert doc["delivered_via"] == "stream"
            b.delivery.close_stream(watcher.client_id, listener)
        finally:
            b.close()

    def test_stream_without_listener_falls_back_to_queue(self):
        b = make_broker()
        try:
            pub = queue_client(b, "pub")
            watcher = b.register_client("watch", Transport.STREAM)
            b.subscribe(watcher.client_id, RECRUITER_SUB)
            b.publish(pub.client_id, CANDIDATE_EVENT)
            got = b.drain_notifications(watcher.client_id)
            assert len(got) == 1
            assert got[0]["delivered_via"] == "queue"
        finally:
            b.close()

    def test_webhook_client_requires_valid_url(self):
        b = make_broker()
        try:
            with pytest.raises(ValueError):
                b.register_client("bad", Transport.WEBHOOK, webhook_url="nope")
        finally:
            b.close()
