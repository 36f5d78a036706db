"""Broker configuration and client records."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from urllib.parse import urlparse

from ..precision import SEMANTIC_DEFAULT, PrecisionConfig


class Mode(enum.Enum):
    SEMANTIC = "semantic"
    SYNTACTIC = "syntactic"


class Transport(enum.Enum):
    QUEUE = "queue"
    WEBHOOK = "webhook"
    STREAM = "stream"


@dataclass(frozen=True)
class ClientRecord:
    client_id: str
    name: str
    transport: Transport
    webhook_url: str = ""

    def __post_init__(self) -> None:
        if self.transport is Transport.WEBHOOK:
            parsed = urlparse(self.webhook_url)
            if parsed.scheme not in ("http", "https") or not parsed.netloc:
                raise ValueError(f"invalid webhook url {self.webhook_url!r}")

    def to_json(self) -> dict:
        doc = {"client_id": self.client_id, "name": self.name,
               "transport": self.transport.value}
        if self.webhook_url:
            doc["url"] = self.webhook_url
        return doc


@dataclass
class BrokerConfig:
    """Runtime settings; current_year resolves open-ended year ranges and
    feeds mapping arithmetic, deliberately decoupled from the wall clock."""

    mode: Mode = Mode.SEMANTIC
    default_precision: PrecisionConfig = SEMANTIC_DEFAULT
    current_year: int = field(default_factory=lambda: date.today().year)
    ontology_paths: tuple[str, ...] = ()
    data_dir: Path | None = None
    host: str = "127.0.0.1"
    port: int = 8080
    admin_token: str = ""

    def __post_init__(self) -> None:
        if isinstance(self.mode, str):
            self.mode = Mode(self.mode)
        if self.data_dir is not None:
            self.data_dir = Path(self.data_dir)
