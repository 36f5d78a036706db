"""Append-only JSON-lines persistence.

One record per line, each a JSON object with a "type" field. Replay returns
the parseable records in order and counts the lines it had to skip, so a
truncated final line (partial write) costs exactly that line.
"""

from __future__ import annotations

import json
import logging
import threading
from pathlib import Path

from ..model import canonical_json

log = logging.getLogger(__name__)


class EventLog:
    def __init__(self, path: Path) -> None:
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._fh = open(self.path, "a", encoding="utf-8")

    def append(self, record: dict) -> None:
        line = canonical_json(record)
        with self._lock:
            self._fh.write(line + "\n")
            self._fh.flush()

    def close(self) -> None:
        with self._lock:
            if not self._fh.closed:
                self._fh.close()


def replay(path: Path) -> tuple[list[dict], int]:
    """(records, skipped) from an existing log; missing file reads as empty."""
    path = Path(path)
    if not path.exists():
        return [], 0
    records: list[dict] = []
    skipped = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                skipped += 1
                log.warning("skipping corrupt log line %d in %s", lineno, path)
                continue
            if not isinstance(record, dict) or "type" not in record:
                skipped += 1
                log.warning("skipping malformed log line %d in %s", lineno, path)
                continue
            records.append(record)
    return records, skipped
