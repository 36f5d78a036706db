"""Semantic rewrite pipeline between raw events and the predicate index.

Subscriptions get synonym normalization only. Events get the full treatment:
a synonym pass, then hierarchy generalization and mapping functions
interleaved until a fixpoint or the pass bound. The result is one accumulated
pair set; each pair keeps the set of cheapest derivation routes so the
matcher can ask, per subscription, whether an allowed route exists.

A route records which stages touched the pair and how many upward hierarchy
edges its derivation consumed (its generality). Routes are kept
Pareto-minimal: a route survives only if no other route is at least as cheap
in both stage set and generality.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .model import Event, Pair, Predicate, Subscription, Symbol, Term, Value
from .ontology import Ontology
from .precision import (
    ALL_STAGES,
    DEFAULT_MAX_PASSES,
    SEMANTIC_DEFAULT,
    SYNTACTIC,
    PrecisionConfig,
    Stage,
)

__all__ = [
    "ALL_STAGES",
    "DEFAULT_MAX_PASSES",
    "SEMANTIC_DEFAULT",
    "SYNTACTIC",
    "DerivedEvent",
    "DerivedPair",
    "PrecisionConfig",
    "Route",
    "Stage",
    "StageRecord",
    "admissible",
    "admissible_route",
    "expand_event",
    "normalize_subscription",
]


@dataclass(frozen=True)
class StageRecord:
    """One derivation step: which stage fired and on what.

    detail is human-readable ("sedan -> car" or a mapping name). hops is the
    cumulative generality after this step, so the last record of a route
    carries the route's total.
    """

    stage: Stage
    detail: str
    hops: int = 0

    def to_json(self) -> dict:
        return {"stage": self.stage.value, "detail": self.detail, "hops": self.hops}


@dataclass(frozen=True)
class Route:
    stages: frozenset[Stage]
    generality: int
    history: tuple[StageRecord, ...]


_RAW_ROUTE = Route(frozenset(), 0, ())


@dataclass(frozen=True)
class DerivedPair:
    pair: Pair
    routes: tuple[Route, ...]

    @property
    def generality_used(self) -> int:
        return min(r.generality for r in self.routes)

    @property
    def provenance(self) -> tuple[StageRecord, ...]:
        return _best_route(self.routes).history

    @property
    def is_original(self) -> bool:
        return any(not r.stages for r in self.routes)


def _best_route(routes: tuple[Route, ...]) -> Route:
    return min(routes, key=lambda r: (r.generality, len(r.stages)))


@dataclass(frozen=True)
class DerivedEvent:
    event_id: str
    pairs: tuple[DerivedPair, ...]

    def pair_set(self) -> set[Pair]:
        return {dp.pair for dp in self.pairs}

    @property
    def generality_used(self) -> int:
        return max((dp.generality_used for dp in self.pairs), default=0)


def normalize_subscription(s: Subscription, o: Ontology) -> Subscription:
    """Rewrite every predicate attribute and Symbol value to its synonym root."""
    changed = False
    predicates = []
    for p in s.predicates:
        attr = o.root_of(p.attribute)
        value = p.value
        if isinstance(value, Symbol):
            root = o.root_of(value.text)
            if root != value.text:
                value = Symbol(root)
        if attr != p.attribute or value is not p.value:
            p = Predicate(attribute=attr, op=p.op, value=value)
            changed = True
        predicates.append(p)
    if not changed:
        return s
    return Subscription(sub_id=s.sub_id, predicates=tuple(predicates),
                        subscriber=s.subscriber, precision=s.precision)


def admissible_route(dp: DerivedPair, precision: PrecisionConfig) -> Route | None:
    """Cheapest route of dp that the given precision admits, if any."""
    best: Route | None = None
    for route in dp.routes:
        if not route.stages <= precision.stages:
            continue
        if (precision.max_generality is not None
                and route.generality > precision.max_generality):
            continue
        if best is None or (route.generality, len(route.stages)) < (
                best.generality, len(best.stages)):
            best = route
    return best


def admissible(dp: DerivedPair, precision: PrecisionConfig) -> bool:
    """True iff some derivation of dp uses only allowed stages within the
    generality cap. Original pairs have an empty route and always qualify."""
    return admissible_route(dp, precision) is not None


class _Accumulator:
    """Pair set under construction; tracks Pareto-minimal routes per pair."""

    def __init__(self) -> None:
        self.routes: dict[Pair, list[Route]] = {}
        self.order: list[Pair] = []

    def add(self, pair: Pair, route: Route) -> bool:
        """Returns True when the pair is new or the route improves on every
        stored route it overlaps; route relaxations count as progress."""
        existing = self.routes.get(pair)
        if existing is None:
            self.routes[pair] = [route]
            self.order.append(pair)
            return True
        for r in existing:
            if r.stages <= route.stages and r.generality <= route.generality:
                return False
        self.routes[pair] = [
            r for r in existing
            if not (route.stages <= r.stages and route.generality <= r.generality)
        ]
        self.routes[pair].append(route)
        return True

    def snapshot(self) -> list[tuple[Pair, tuple[Route, ...]]]:
        return [(pair, tuple(self.routes[pair])) for pair in self.order]

    def pairs(self) -> list[Pair]:
        return list(self.order)

    def finish(self, event_id: str) -> DerivedEvent:
        return DerivedEvent(
            event_id=event_id,
            pairs=tuple(DerivedPair(pair, tuple(self.routes[pair]))
                        for pair in self.order))


def expand_event(e: Event, o: Ontology, cfg: PrecisionConfig,
                 current_year: int) -> DerivedEvent:
    """Close the event's pairs under the enabled stages.

    Pass 0 keeps every original pair (empty route) and, with SYNONYM on, adds
    the root-rewritten twin of each changed pair. Then up to cfg.max_passes
    rounds: hierarchy substitutions over attribute terms and Symbol values
    within the generality budget, followed by mapping firings over the whole
    accumulated set. Stops early once a round adds no pair and improves no
    route.
    """
    acc = _Accumulator()
    for pair in e.pairs:
        acc.add(pair, _RAW_ROUTE)

    if Stage.SYNONYM in cfg.stages:
        for attr, value in e.pairs:
            n_attr = o.root_of(attr)
            n_value = value
            records: list[StageRecord] = []
            if n_attr != attr:
                records.append(StageRecord(Stage.SYNONYM, f"{attr} -> {n_attr}"))
            if isinstance(value, Symbol):
                root = o.root_of(value.text)
                if root != value.text:
                    n_value = Symbol(root)
                    records.append(StageRecord(Stage.SYNONYM, f"{value.text} -> {root}"))
            if records:
                acc.add((n_attr, n_value),
                        Route(frozenset({Stage.SYNONYM}), 0, tuple(records)))

    hierarchy_on = Stage.HIERARCHY in cfg.stages
    mapping_on = Stage.MAPPING in cfg.stages
    if not (hierarchy_on or mapping_on):
        return acc.finish(e.event_id)

    for _ in range(cfg.max_passes):
        changed = False
        if hierarchy_on:
            for pair, routes in acc.snapshot():
                for route in routes:
                    changed |= _climb(acc, o, pair, route, cfg.max_generality)
        if mapping_on:
            changed |= _fire_mappings(acc, o, current_year)
        if not changed:
            break
    return acc.finish(e.event_id)


def _climb(acc: _Accumulator, o: Ontology, pair: Pair, route: Route,
           max_generality: int | None) -> bool:
    budget: int | None = None
    if max_generality is not None:
        budget = max_generality - route.generality
        if budget <= 0:
            return False
    attr, value = pair
    changed = False
    stages = route.stages | {Stage.HIERARCHY}
    for anc, d in o.ancestors(attr, budget):
        gen = route.generality + d
        record = StageRecord(Stage.HIERARCHY, f"{attr} -> {anc}", hops=gen)
        changed |= acc.add((anc, value),
                           Route(stages, gen, route.history + (record,)))
    if isinstance(value, Symbol):
        for anc, d in o.ancestors(value.text, budget):
            gen = route.generality + d
            record = StageRecord(Stage.HIERARCHY, f"{value.text} -> {anc}", hops=gen)
            changed |= acc.add((attr, Symbol(anc)),
                               Route(stages, gen, route.history + (record,)))
    return changed


def _fire_mappings(acc: _Accumulator, o: Ontology, current_year: int) -> bool:
    pairs = acc.pairs()
    changed = False
    for f in o.applicable_mappings(pairs, current_year):
        for used_idx, outputs in o.mapping_applications(f, pairs, current_year):
            used = [pairs[i] for i in used_idx]
            route_choices = [tuple(acc.routes[p]) for p in used]
            for combo in itertools.product(*route_choices):
                stages = frozenset().union(*(r.stages for r in combo),
                                           {Stage.MAPPING})
                gen = sum(r.generality for r in combo)
                history: tuple[StageRecord, ...] = ()
                for r in combo:
                    history += r.history
                history += (StageRecord(Stage.MAPPING, f.name, hops=gen),)
                route = Route(stages, gen, history)
                for out_pair in outputs:
                    changed |= acc.add(out_pair, route)
    return changed
