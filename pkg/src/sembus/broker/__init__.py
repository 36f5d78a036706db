"""Network-facing event dispatcher: clients, subscriptions, publications,
notification delivery over three transports, and append-only persistence."""

from .config import BrokerConfig, ClientRecord, Mode, Transport
from .core import Broker

__all__ = ["Broker", "BrokerConfig", "ClientRecord", "Mode", "Transport"]
