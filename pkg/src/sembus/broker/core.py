"""The event dispatcher: wires parsing, the semantic pipeline, the predicate
index, delivery, and the persistence log together.

Persistence is a single append-only JSON-lines file. Clients, subscriptions,
mode switches, notifications, deliveries and dead letters are all logged;
recovery replays the log in order, rebuilds the index, and re-enqueues every
notification that was accepted but never delivered.
"""

from __future__ import annotations

import hashlib
import threading
import uuid

from ..matcher import PredicateIndex
from ..model import (
    Notification,
    Subscription,
    canonical_json,
    parse_event,
    parse_subscription,
    subscription_to_json,
)
from ..ontology import Ontology, load_ontology_files
from ..pipeline import expand_event, normalize_subscription
from ..precision import SYNTACTIC, Stage
from .config import BrokerConfig, ClientRecord, Mode, Transport
from .delivery import DeliveryEngine
from .storage import EventLog, replay

LOG_FILE = "broker.jsonl"


class UnknownClient(KeyError):
    pass


class Broker:
    def __init__(self, config: BrokerConfig | None = None,
                 ontology: Ontology | None = None) -> None:
        self.config = config or BrokerConfig()
        if ontology is not None:
            self.ontology = ontology
        elif self.config.ontology_paths:
            self.ontology = load_ontology_files(self.config.ontology_paths)
        else:
            self.ontology = Ontology.empty()
        self._digest = _ontology_digest(self.ontology)

        self._lock = threading.RLock()
        self.index = PredicateIndex()
        self.clients: dict[str, ClientRecord] = {}
        self.mode = self.config.mode
        self.events_published = 0
        self.notifications_sent = 0
        self.log_lines_skipped = 0

        self.delivery = DeliveryEngine(on_delivered=self._record_delivered,
                                       on_dead_letter=self._record_dead_letter)
        self.log: EventLog | None = None
        if self.config.data_dir is not None:
            log_path = self.config.data_dir / LOG_FILE
            pending = self._recover(log_path)
            self.log = EventLog(log_path)
            # Re-enqueue only after the log is open for appends, so delivery
            # confirmations raced by background transports are not lost.
            for doc in pending:
                client = self.clients.get(doc.get("subscriber", ""))
                if client is not None:
                    self.delivery.enqueue(doc, client)

    # -- persistence ---------------------------------------------------------

    def _append(self, record: dict) -> None:
        if self.log is not None:
            self.log.append(record)

    def _record_delivered(self, dedupe_key: str, via: str) -> None:
        self._append({"type": "delivered", "key": dedupe_key, "via": via})

    def _record_dead_letter(self, entry: dict) -> None:
        self._append({"type": "dead_letter", "entry": entry})

    def _recover(self, log_path) -> list[dict]:
        records, skipped = replay(log_path)
        self.log_lines_skipped = skipped
        pending: dict[str, dict] = {}  # dedupe_key -> notification JSON
        for record in records:
            kind = record.get("type")
            try:
                if kind == "client":
                    doc = record["client"]
                    self.clients[doc["client_id"]] = ClientRecord(
                        client_id=doc["client_id"], name=doc.get("name", ""),
                        transport=Transport(doc["transport"]),
                        webhook_url=doc.get("url", ""))
                elif kind == "mode":
                    self.mode = Mode(record["mode"])
                elif kind == "subscription":
                    s = parse_subscription(record["subscription"],
                                           subscriber=record.get("client_id", ""))
                    self.index.add_subscription(s)
                elif kind == "unsubscribe":
                    self.index.remove_subscription(record["sub_id"])
                elif kind == "notification":
                    doc = record["notification"]
                    pending[doc["dedupe_key"]] = doc
                elif kind == "delivered":
                    pending.pop(record["key"], None)
                elif kind == "dead_letter":
                    entry = record["entry"]
                    pending.pop(entry["notification"].get("dedupe_key", ""), None)
                    self.delivery.restore_dead_letter(entry)
            except (KeyError, ValueError):
                self.log_lines_skipped += 1
        return list(pending.values())

    # -- client lifecycle ------------------------------------------------------

    def register_client(self, name: str, transport: Transport | str,
                        webhook_url: str = "") -> ClientRecord:
        if isinstance(transport, str):
            transport = Transport(transport)
        record = ClientRecord(client_id=f"cli-{uuid.uuid4().hex[:12]}",
                              name=str(name), transport=transport,
                              webhook_url=webhook_url)
        with self._lock:
            self.clients[record.client_id] = record
        self._append({"type": "client", "client": record.to_json()})
        return record

    def client(self, client_id: str) -> ClientRecord:
        with self._lock:
            record = self.clients.get(client_id)
        if record is None:
            raise UnknownClient(client_id)
        return record

    # -- subscribe / publish ---------------------------------------------------

    def subscribe(self, client_id: str, document) -> Subscription:
        self.client(client_id)
        s = parse_subscription(document, subscriber=client_id)
        effective = s.precision if s.precision is not None else self.config.default_precision
        with self._lock:
            semantic = self.mode is Mode.SEMANTIC
        if semantic and Stage.SYNONYM in effective.stages:
            s = normalize_subscription(s, self.ontology)
        self.index.add_subscription(s)
        self._append({"type": "subscription", "client_id": client_id,
                      "subscription": subscription_to_json(s)})
        return s

    def unsubscribe(self, sub_id: str) -> bool:
        removed = self.index.remove_subscription(sub_id)
        if removed:
            self._append({"type": "unsubscribe", "sub_id": sub_id})
        return removed

    def publish(self, client_id: str, document) -> dict:
        """Parse, expand per mode, match, enqueue one notification per matched
        subscription. The receipt's matched_count is computed synchronously."""
        self.client(client_id)
        e = parse_event(document)
        with self._lock:
            mode = self.mode
        precision = (SYNTACTIC if mode is Mode.SYNTACTIC
                     else self.config.default_precision)
        expanded = expand_event(e, self.ontology, precision,
                                self.config.current_year)
        details = self.index.match_details(expanded, precision,
                                           self.config.current_year)
        for detail in details:
            sub = self.index.get(detail.sub_id)
            if sub is None:  # unsubscribed between match and dispatch
                continue
            client = self.clients.get(sub.subscriber)
            if client is None:
                continue
            n = Notification(
                event_id=e.event_id, sub_id=detail.sub_id,
                subscriber=sub.subscriber, publisher=client_id,
                trace=tuple(record.to_json() for record in detail.trace),
                delivered_via=client.transport.value)
            doc = n.to_json()
            self._append({"type": "notification", "notification": doc})
            self.delivery.enqueue(doc, client)
        with self._lock:
            self.events_published += 1
            self.notifications_sent += len(details)
        return {"event_id": e.event_id, "matched_count": len(details)}

    def drain_notifications(self, client_id: str) -> list[dict]:
        self.client(client_id)
        return self.delivery.drain(client_id)

    # -- admin ------------------------------------------------------------------

    def set_mode(self, mode: Mode | str) -> Mode:
        if isinstance(mode, str):
            mode = Mode(mode)
        with self._lock:
            self.mode = mode
        self._append({"type": "mode", "mode": mode.value})
        return mode

    def status(self) -> dict:
        with self._lock:
            return {
                "mode": self.mode.value,
                "clients": len(self.clients),
                "subscriptions": len(self.index),
                "events_published": self.events_published,
                "notifications_sent": self.notifications_sent,
                "dead_letters": len(self.delivery.dead_letters()),
                "log_lines_skipped": self.log_lines_skipped,
                "current_year": self.config.current_year,
                "ontology": {
                    "domains": [d for d in self.ontology.domains if d],
                    "digest": self._digest,
                },
            }

    def close(self) -> None:
        self.delivery.stop()
        if self.log is not None:
            self.log.close()


def _ontology_digest(o: Ontology) -> str:
    doc = {
        "synonyms": sorted(o.synonyms.items()),
        "hierarchy": sorted((child, list(parents))
                            for child, parents in o.parents.items()),
        "mappings": sorted(f.name for f in o.mappings),
        "domains": list(o.domains),
    }
    return hashlib.sha256(canonical_json(doc).encode()).hexdigest()[:16]
