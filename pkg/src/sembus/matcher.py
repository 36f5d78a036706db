"""Counting-based matching engine.

Each registered predicate lands in exactly one of two structures: an exact
hash index keyed by (attribute, value) for equality over hashable values, or
a per-attribute candidate list for everything evaluated at match time
(ordering operators, range containment, inequality, and year-range equality,
whose outcome can depend on the configured current year).

Matching counts distinct satisfied predicate ordinals per subscription; a
subscription fires when the count reaches its predicate arity. Derived pairs
only count toward a subscription when one of their derivation routes is
admissible under that subscription's precision.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import (
    Bool,
    Number,
    Op,
    Pair,
    Predicate,
    Subscription,
    Symbol,
    Term,
    Value,
    evaluate_predicate,
)
from .pipeline import DerivedEvent, DerivedPair, Route, StageRecord, admissible_route
from .precision import PrecisionConfig

_EQ_HASHABLE = (Symbol, Number, Bool)


class DuplicateSubscription(ValueError):
    pass


@dataclass(frozen=True)
class MatchDetail:
    """Why one subscription matched: the pairs that satisfied its predicates
    and the deduplicated derivation records behind them."""

    sub_id: str
    pairs: tuple[Pair, ...]
    trace: tuple[StageRecord, ...]
    generality_used: int


class PredicateIndex:
    """Thread-safe subscription store with counting match.

    Writers (add/remove) and readers (match) serialize on one lock, so a
    match sees the store either before or after any given update.
    """

    def __init__(self) -> None:
        self._lock = threading.RLock()
        self._eq_index: dict[tuple[Term, Value], list[tuple[str, int]]] = {}
        self._attr_index: dict[Term, list[tuple[Predicate, str, int]]] = {}
        self._sub_arity: dict[str, int] = {}
        self._subs: dict[str, Subscription] = {}

    def __len__(self) -> int:
        with self._lock:
            return len(self._subs)

    def __contains__(self, sub_id: str) -> bool:
        with self._lock:
            return sub_id in self._subs

    def get(self, sub_id: str) -> Subscription | None:
        with self._lock:
            return self._subs.get(sub_id)

    def subscriptions(self) -> list[Subscription]:
        with self._lock:
            return list(self._subs.values())

    def add_subscription(self, s: Subscription) -> str:
        with self._lock:
            if s.sub_id in self._subs:
                raise DuplicateSubscription(f"duplicate sub_id {s.sub_id!r}")
            for ordinal, p in enumerate(s.predicates):
                if p.op is Op.EQ and isinstance(p.value, _EQ_HASHABLE):
                    key = (p.attribute, p.value)
                    self._eq_index.setdefault(key, []).append((s.sub_id, ordinal))
                else:
                    self._attr_index.setdefault(p.attribute, []).append(
                        (p, s.sub_id, ordinal))
            self._sub_arity[s.sub_id] = len(s.predicates)
            self._subs[s.sub_id] = s
            return s.sub_id

    def remove_subscription(self, sub_id: str) -> bool:
        with self._lock:
            s = self._subs.pop(sub_id, None)
            if s is None:
                return False
            del self._sub_arity[sub_id]
            for p in s.predicates:
                if p.op is Op.EQ and isinstance(p.value, _EQ_HASHABLE):
                    key = (p.attribute, p.value)
                    entries = [e for e in self._eq_index[key] if e[0] != sub_id]
                    if entries:
                        self._eq_index[key] = entries
                    else:
                        del self._eq_index[key]
                else:
                    entries = [e for e in self._attr_index[p.attribute]
                               if e[1] != sub_id]
                    if entries:
                        self._attr_index[p.attribute] = entries
                    else:
                        del self._attr_index[p.attribute]
            return True

    def _effective(self, sub_id: str, default: PrecisionConfig) -> PrecisionConfig:
        p = self._subs[sub_id].precision
        return p if p is not None else default

    def _hits(self, pair: Pair, current_year: int | None) -> list[tuple[str, int]]:
        attr, value = pair
        hits: list[tuple[str, int]] = []
        if isinstance(value, _EQ_HASHABLE):
            hits.extend(self._eq_index.get((attr, value), ()))
        for pred, sub_id, ordinal in self._attr_index.get(attr, ()):
            if evaluate_predicate(pred, pair, current_year):
                hits.append((sub_id, ordinal))
        return hits

    def match(self, expanded: DerivedEvent, default_precision: PrecisionConfig,
              current_year: int | None = None) -> set[str]:
        """sub_ids whose every predicate is satisfied by an admissible pair."""
        with self._lock:
            satisfied: dict[str, set[int]] = {}
            route_memo: dict[tuple[int, PrecisionConfig], bool] = {}
            for i, dp in enumerate(expanded.pairs):
                hits = self._hits(dp.pair, current_year)
                for sub_id, ordinal in hits:
                    precision = self._effective(sub_id, default_precision)
                    memo_key = (i, precision)
                    ok = route_memo.get(memo_key)
                    if ok is None:
                        ok = admissible_route(dp, precision) is not None
                        route_memo[memo_key] = ok
                    if ok:
                        satisfied.setdefault(sub_id, set()).add(ordinal)
            return {sub_id for sub_id, ordinals in satisfied.items()
                    if len(ordinals) == self._sub_arity[sub_id]}

    def match_details(self, expanded: DerivedEvent,
                      default_precision: PrecisionConfig,
                      current_year: int | None = None) -> list[MatchDetail]:
        """Like match, but reports which pairs and derivation steps satisfied
        each matched subscription (first admissible pair per predicate)."""
        with self._lock:
            chosen: dict[str, dict[int, tuple[DerivedPair, Route]]] = {}
            for dp in expanded.pairs:
                for sub_id, ordinal in self._hits(dp.pair, current_year):
                    slots = chosen.setdefault(sub_id, {})
                    if ordinal in slots:
                        continue
                    route = admissible_route(
                        dp, self._effective(sub_id, default_precision))
                    if route is not None:
                        slots[ordinal] = (dp, route)
            details = []
            for sub_id, slots in chosen.items():
                if len(slots) != self._sub_arity[sub_id]:
                    continue
                pairs: list[Pair] = []
                trace: list[StageRecord] = []
                generality = 0
                for ordinal in sorted(slots):
                    dp, route = slots[ordinal]
                    if dp.pair not in pairs:
                        pairs.append(dp.pair)
                    generality = max(generality, route.generality)
                    for record in route.history:
                        if record not in trace:
                            trace.append(record)
                details.append(MatchDetail(
                    sub_id=sub_id, pairs=tuple(pairs), trace=tuple(trace),
                    generality_used=generality))
            details.sort(key=lambda d: d.sub_id)
            return details


def oracle_match(subs: Iterable[Subscription], expanded: DerivedEvent,
                 default_precision: PrecisionConfig,
                 current_year: int | None = None) -> set[str]:
    """Index-free reference: nested loops over subscriptions, predicates and
    pairs, applying the identical satisfaction definition."""
    out: set[str] = set()
    for s in subs:
        precision = s.precision if s.precision is not None else default_precision
        for pred in s.predicates:
            if not any(
                admissible_route(dp, precision) is not None
                and evaluate_predicate(pred, dp.pair, current_year)
                for dp in expanded.pairs
            ):
                break
        else:
            out.add(s.sub_id)
    return out
