"""Notification delivery over three transports.

QUEUE appends to a per-client buffer drained by polling. STREAM pushes to
every open live feed of the client and falls back to the queue when none is
open. WEBHOOK posts the notification JSON from a background worker with a
bounded retry schedule; notifications that exhaust their attempts are parked
in the dead-letter list.

Queue and stream deliveries are exactly-once per notification; webhooks are
at-least-once (receivers dedupe on the dedupe_key field in the payload).
"""

from __future__ import annotations

import logging
import queue
import threading
import time
from collections import deque

import httpx

from ..model import canonical_json
from .config import ClientRecord, Transport

log = logging.getLogger(__name__)

WEBHOOK_ATTEMPTS = 3


class DeliveryEngine:
    """on_delivered(dedupe_key, via) fires when a notification definitively
    reaches its client; on_dead_letter(entry) when a webhook gives up."""

    def __init__(self, on_delivered=None, on_dead_letter=None,
                 webhook_attempts: int = WEBHOOK_ATTEMPTS,
                 backoff: float = 0.05, webhook_timeout: float = 2.0) -> None:
        self._on_delivered = on_delivered or (lambda key, via: None)
        self._on_dead_letter = on_dead_letter or (lambda entry: None)
        self._attempts = webhook_attempts
        self._backoff = backoff
        self._timeout = webhook_timeout
        self._lock = threading.Lock()
        self._queues: dict[str, deque[dict]] = {}
        self._streams: dict[str, list[queue.SimpleQueue]] = {}
        self._dead: list[dict] = []
        self._tasks: queue.Queue = queue.Queue()
        self._worker = threading.Thread(target=self._webhook_loop, daemon=True)
        self._worker.start()

    # -- ingestion ---------------------------------------------------------

    def enqueue(self, notification: dict, client: ClientRecord) -> str:
        """Route one notification JSON document; returns the route taken."""
        if client.transport is Transport.WEBHOOK:
            self._tasks.put((notification, client.webhook_url))
            return "webhook"
        if client.transport is Transport.STREAM:
            with self._lock:
                listeners = list(self._streams.get(client.client_id, ()))
            if listeners:
                for listener in listeners:
                    listener.put(notification)
                self._on_delivered(notification["dedupe_key"], "stream")
                return "stream"
            notification = dict(notification, delivered_via="queue")
        with self._lock:
            self._queues.setdefault(client.client_id, deque()).append(notification)
        return "queue"

    # -- queue transport ----------------------------------------------------

    def drain(self, client_id: str) -> list[dict]:
        with self._lock:
            buffered = self._queues.get(client_id)
            drained = list(buffered) if buffered else []
            if buffered:
                buffered.clear()
        for n in drained:
            self._on_delivered(n["dedupe_key"], "queue")
        return drained

    def pending(self, client_id: str) -> int:
        with self._lock:
            buffered = self._queues.get(client_id)
            return len(buffered) if buffered else 0

    # -- stream transport ---------------------------------------------------

    def open_stream(self, client_id: str) -> queue.SimpleQueue:
        listener: queue.SimpleQueue = queue.SimpleQueue()
        with self._lock:
            self._streams.setdefault(client_id, []).append(listener)
        return listener

    def close_stream(self, client_id: str, listener: queue.SimpleQueue) -> None:
        with self._lock:
            listeners = self._streams.get(client_id)
            if listeners and listener in listeners:
                listeners.remove(listener)
                if not listeners:
                    del self._streams[client_id]

    # -- webhook transport --------------------------------------------------

    def _webhook_loop(self) -> None:
        while True:
            task = self._tasks.get()
            if task is None:
                self._tasks.task_done()
                return
            notification, url = task
            try:
                self._post_with_retries(notification, url)
            finally:
                self._tasks.task_done()

    def _post_with_retries(self, notification: dict, url: str) -> None:
        body = canonical_json(notification).encode()
        last_error = ""
        for attempt in range(1, self._attempts + 1):
            try:
                response = httpx.post(
                    url, content=body,
                    headers={"content-type": "application/json"},
                    timeout=self._timeout)
                if 200 <= response.status_code < 300:
                    self._on_delivered(notification["dedupe_key"], "webhook")
                    return
                last_error = f"status {response.status_code}"
            except httpx.HTTPError as exc:
                last_error = str(exc) or type(exc).__name__
            if attempt < self._attempts:
                time.sleep(self._backoff * (2 ** (attempt - 1)))
        entry = {
            "notification": notification,
            "url": url,
            "attempts": self._attempts,
            "error": last_error,
            "parked_at": time.time(),
        }
        log.warning("webhook to %s dead-lettered after %d attempts: %s",
                    url, self._attempts, last_error)
        with self._lock:
            self._dead.append(entry)
        self._on_dead_letter(entry)

    # -- introspection / lifecycle -------------------------------------------

    def dead_letters(self) -> list[dict]:
        with self._lock:
            return list(self._dead)

    def restore_dead_letter(self, entry: dict) -> None:
        with self._lock:
            self._dead.append(entry)

    def join(self) -> None:
        """Block until every queued webhook task has finished."""
        self._tasks.join()

    def stop(self) -> None:
        self._tasks.put(None)
        self._worker.join(timeout=5.0)
