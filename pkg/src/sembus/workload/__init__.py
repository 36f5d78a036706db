"""Seeded workload generation and a concurrent HTTP driver for the broker."""

from .domain import AttributePool, DomainSpec
from .generate import generate

__all__ = ["AttributePool", "DomainSpec", "generate"]
