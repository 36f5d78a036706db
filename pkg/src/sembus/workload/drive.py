"""Replays generated streams against a live broker.

Registers one publisher and a pool of subscriber clients, posts every
subscription, then publishes events from N worker threads paced to the
target rate. Connection failures are retried a bounded number of times and
counted. The run report is written as JSON plus a per-request CSV.
"""

from __future__ import annotations

import csv
import json
import queue
import threading
import time
from pathlib import Path

import httpx

RETRY_LIMIT = 3
RETRY_BACKOFF = 0.1


class _Recorder:
    def __init__(self) -> None:
        self.lock = threading.Lock()
        self.rows: list[dict] = []
        self.retries = 0
        self.errors = 0
        self.matched_total = 0

    def add(self, row: dict) -> None:
        with self.lock:
            self.rows.append(row)

    def bump(self, retries: int = 0, errors: int = 0, matched: int = 0) -> None:
        with self.lock:
            self.retries += retries
            self.errors += errors
            self.matched_total += matched


def _post_with_retries(client: httpx.Client, path: str, body: dict,
                       recorder: _Recorder) -> httpx.Response | None:
    for attempt in range(1, RETRY_LIMIT + 1):
        try:
            return client.post(path, json=body)
        except httpx.HTTPError:
            if attempt == RETRY_LIMIT:
                recorder.bump(errors=1)
                return None
            recorder.bump(retries=1)
            time.sleep(RETRY_BACKOFF * attempt)
    return None


def _percentile(sorted_values: list[float], q: float) -> float:
    if not sorted_values:
        return 0.0
    idx = min(len(sorted_values) - 1, int(q * len(sorted_values)))
    return sorted_values[idx]


def drive(broker_url: str, rate: float, concurrency: int, in_dir: str | Path,
          report_path: str | Path | None = None) -> dict:
    in_dir = Path(in_dir)
    subs = [json.loads(line) for line in
            (in_dir / "subscriptions.jsonl").read_text().splitlines() if line]
    events = [json.loads(line) for line in
              (in_dir / "events.jsonl").read_text().splitlines() if line]
    concurrency = max(1, concurrency)
    recorder = _Recorder()
    started = time.monotonic()

    with httpx.Client(base_url=broker_url, timeout=10.0) as client:
        publisher = client.post(
            "/clients", json={"name": "workload-publisher",
                              "transport": "queue"}).json()["client_id"]
        subscriber_ids = []
        for i in range(min(concurrency, max(1, len(subs)))):
            response = client.post(
                "/clients", json={"name": f"workload-subscriber-{i}",
                                  "transport": "queue"})
            subscriber_ids.append(response.json()["client_id"])

        for i, doc in enumerate(subs):
            body = {"client_id": subscriber_ids[i % len(subscriber_ids)],
                    "subscription": doc}
            t0 = time.monotonic()
            response = _post_with_retries(client, "/subscriptions", body,
                                          recorder)
            recorder.add({
                "kind": "subscription", "index": i,
                "status": response.status_code if response else 0,
                "latency_ms": (time.monotonic() - t0) * 1000.0,
                "matched": "",
            })

        interval = 1.0 / rate if rate and rate > 0 else 0.0
        pub_start = time.monotonic()
        tasks: queue.Queue = queue.Queue()
        for i, doc in enumerate(events):
            tasks.put((i, pub_start + i * interval, doc))

        def worker() -> None:
            with httpx.Client(base_url=broker_url, timeout=10.0) as session:
                while True:
                    try:
                        i, due, doc = tasks.get_nowait()
                    except queue.Empty:
                        return
                    delay = due - time.monotonic()
                    if delay > 0:
                        time.sleep(delay)
                    t0 = time.monotonic()
                    response = _post_with_retries(
                        session, "/publications",
                        {"client_id": publisher, "event": doc}, recorder)
                    matched = ""
                    if response is not None and response.status_code == 201:
                        matched = response.json().get("matched_count", 0)
                        recorder.bump(matched=matched)
                    elif response is not None:
                        recorder.bump(errors=1)
                    recorder.add({
                        "kind": "publication", "index": i,
                        "status": response.status_code if response else 0,
                        "latency_ms": (time.monotonic() - t0) * 1000.0,
                        "matched": matched,
                    })

        threads = [threading.Thread(target=worker) for _ in range(concurrency)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()

    duration = time.monotonic() - started
    latencies = sorted(row["latency_ms"] for row in recorder.rows
                       if row["kind"] == "publication")
    report = {
        "broker": broker_url,
        "rate": rate,
        "concurrency": concurrency,
        "subscriptions": len(subs),
        "publications": len(events),
        "matched_total": recorder.matched_total,
        "errors": recorder.errors,
        "retries": recorder.retries,
        "duration_s": round(duration, 3),
        "latency_ms": {
            "p50": round(_percentile(latencies, 0.50), 3),
            "p95": round(_percentile(latencies, 0.95), 3),
            "p99": round(_percentile(latencies, 0.99), 3),
            "mean": round(sum(latencies) / len(latencies), 3) if latencies else 0.0,
            "max": round(latencies[-1], 3) if latencies else 0.0,
        },
    }
    if report_path is not None:
        report_path = Path(report_path)
        report_path.parent.mkdir(parents=True, exist_ok=True)
        report_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
        rows = sorted(recorder.rows, key=lambda r: (r["kind"], r["index"]))
        with open(report_path.with_suffix(".csv"), "w", newline="",
                  encoding="utf-8") as fh:
            writer = csv.DictWriter(
                fh, fieldnames=["kind", "index", "status", "latency_ms",
                                "matched"])
            writer.writeheader()
            writer.writerows(rows)
    return report
