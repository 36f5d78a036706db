"""Vocabulary description driving the workload generator.

A DomainSpec lists attribute pools (what values each attribute can take and
which alias spellings exist), the shape distributions for generated
subscriptions and events, and the probability of emitting an alias instead
of a root term.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..ontology import Ontology

KINDS = ("symbol", "number", "year_range", "bool")


@dataclass(frozen=True)
class AttributePool:
    attr: str
    kind: str
    values: tuple[str, ...] = ()
    number_range: tuple[int, int] = (0, 100)
    years: tuple[int, int] = (1960, 2010)
    attr_aliases: tuple[str, ...] = ()
    value_aliases: dict[str, tuple[str, ...]] = field(default_factory=dict)
    depth: int = 0  # hierarchy depth annotation of the value terms

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"pool {self.attr!r}: unknown kind {self.kind!r}")
        if self.kind == "symbol" and not self.values:
            raise ValueError(f"pool {self.attr!r}: empty symbol value pool")
        if self.kind == "number" and self.number_range[0] > self.number_range[1]:
            raise ValueError(f"pool {self.attr!r}: empty number range")
        if self.kind == "year_range" and self.years[0] > self.years[1]:
            raise ValueError(f"pool {self.attr!r}: empty year span")


@dataclass(frozen=True)
class DomainSpec:
    name: str
    attributes: tuple[AttributePool, ...]
    synonym_usage: float = 0.0
    predicate_count: tuple[int, int] = (1, 5)
    pair_count: tuple[int, int] = (2, 10)

    def __post_init__(self) -> None:
        if not self.attributes:
            raise ValueError("domain spec needs at least one attribute pool")
        if not 0.0 <= self.synonym_usage <= 1.0:
            raise ValueError("synonym_usage must be within [0, 1]")
        for lo, hi in (self.predicate_count, self.pair_count):
            if lo < 1 or lo > hi:
                raise ValueError("count ranges must satisfy 1 <= lo <= hi")

    @classmethod
    def from_json(cls, document) -> DomainSpec:
        if isinstance(document, (str, bytes)):
            document = json.loads(document)
        pools = []
        for raw in document.get("attributes", []):
            pools.append(AttributePool(
                attr=raw["attr"],
                kind=raw.get("kind", "symbol"),
                values=tuple(raw.get("values", ())),
                number_range=tuple(raw.get("range", (0, 100))),
                years=tuple(raw.get("years", (1960, 2010))),
                attr_aliases=tuple(raw.get("attr_aliases", ())),
                value_aliases={k: tuple(v) for k, v in
                               raw.get("value_aliases", {}).items()},
                depth=int(raw.get("depth", 0)),
            ))
        return cls(
            name=document.get("name", "workload"),
            attributes=tuple(pools),
            synonym_usage=float(document.get("synonym_usage", 0.0)),
            predicate_count=tuple(document.get("predicate_count", (1, 5))),
            pair_count=tuple(document.get("pair_count", (2, 10))),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> DomainSpec:
        return cls.from_json(Path(path).read_text())

    def novel_terms(self, o: Ontology) -> list[str]:
        """Terms this spec uses that the ontology does not know. Informative:
        novel terms still generate, they just never rewrite."""
        known: set[str] = set(o.synonyms)
        known.update(o.parents)
        for parents in o.parents.values():
            known.update(parents)
        for f in o.mappings:
            known.update(p.attribute for p in f.inputs)
            known.update(attr for attr, _ in f.outputs)
        novel = []
        for pool in self.attributes:
            for t in (pool.attr, *pool.attr_aliases, *pool.values):
                folded = t.strip().casefold()
                if folded not in known and t not in novel:
                    novel.append(t)
        return novel
