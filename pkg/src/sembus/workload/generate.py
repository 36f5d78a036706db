"""Deterministic workload synthesis.

Given a seed and a DomainSpec, emits subscription and event documents whose
serialized form is byte-identical across runs. Alias substitution (emitting
an alias spelling instead of the root term) is decided per opportunity with
the configured probability and tallied for statistical checks.
"""

from __future__ import annotations

import random
from pathlib import Path

from ..model import canonical_json
from .domain import AttributePool, DomainSpec

_NUMBER_OPS = ("=", ">=", "<=", ">", "<", "!=")
_NUMBER_OP_WEIGHTS = (4, 2, 2, 1, 1, 1)
_PRESENT_PROBABILITY = 0.2


class _AliasTally:
    def __init__(self) -> None:
        self.opportunities = 0
        self.substitutions = 0


def _spell(term_text: str, aliases: tuple[str, ...], rng: random.Random,
           probability: float, tally: _AliasTally) -> str:
    if not aliases:
        return term_text
    tally.opportunities += 1
    if rng.random() < probability:
        tally.substitutions += 1
        return rng.choice(aliases)
    return term_text


def _draw_value(pool: AttributePool, rng: random.Random, probability: float,
                tally: _AliasTally):
    if pool.kind == "symbol":
        root = rng.choice(pool.values)
        return _spell(root, pool.value_aliases.get(root, ()), rng,
                      probability, tally)
    if pool.kind == "number":
        return rng.randint(*pool.number_range)
    if pool.kind == "bool":
        return rng.random() < 0.5
    lo, hi = pool.years
    start = rng.randint(lo, hi)
    if rng.random() < _PRESENT_PROBABILITY:
        return f"{start:04d}-present"
    return f"{start:04d}-{rng.randint(start, hi):04d}"


def _draw_predicate(pool: AttributePool, rng: random.Random,
                    probability: float, tally: _AliasTally) -> list:
    attr = _spell(pool.attr, pool.attr_aliases, rng, probability, tally)
    if pool.kind == "symbol":
        op = "=" if rng.random() < 0.85 else "!="
        value = _draw_value(pool, rng, probability, tally)
    elif pool.kind == "number":
        op = rng.choices(_NUMBER_OPS, weights=_NUMBER_OP_WEIGHTS, k=1)[0]
        value = rng.randint(*pool.number_range)
    elif pool.kind == "bool":
        op = "="
        value = rng.random() < 0.5
    else:
        op = "in"
        lo, hi = pool.years
        start = rng.randint(lo, hi)
        value = f"{start:04d}-{rng.randint(start, hi):04d}"
    return [attr, op, value]


def generate(seed: int, n_subs: int, n_pubs: int,
             spec: DomainSpec) -> tuple[list[dict], list[dict], dict]:
    """(subscription docs, event docs, stats); same inputs, same outputs."""
    rng = random.Random(seed)
    tally = _AliasTally()
    pools = spec.attributes

    subs: list[dict] = []
    for i in range(n_subs):
        k = rng.randint(*spec.predicate_count)
        k = min(k, len(pools))
        chosen = rng.sample(pools, k)
        subs.append({
            "sub_id": f"sub-{seed}-{i:06d}",
            "predicates": [_draw_predicate(p, rng, spec.synonym_usage, tally)
                           for p in chosen],
        })

    events: list[dict] = []
    for i in range(n_pubs):
        m = rng.randint(*spec.pair_count)
        m = min(m, len(pools))
        chosen = rng.sample(pools, m)
        pairs = []
        for pool in chosen:
            attr = _spell(pool.attr, pool.attr_aliases, rng,
                          spec.synonym_usage, tally)
            pairs.append([attr, _draw_value(pool, rng, spec.synonym_usage,
                                            tally)])
        events.append({"event_id": f"evt-{seed}-{i:06d}", "pairs": pairs})

    stats = {
        "seed": seed,
        "subs": n_subs,
        "pubs": n_pubs,
        "spec_name": spec.name,
        "alias_opportunities": tally.opportunities,
        "alias_substitutions": tally.substitutions,
        "alias_fraction": (tally.substitutions / tally.opportunities
                           if tally.opportunities else 0.0),
    }
    return subs, events, stats


def write_streams(out_dir: str | Path, subs: list[dict], events: list[dict],
                  stats: dict) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "subscriptions.jsonl", "w", encoding="utf-8") as fh:
        for doc in subs:
            fh.write(canonical_json(doc) + "\n")
    with open(out / "events.jsonl", "w", encoding="utf-8") as fh:
        for doc in events:
            fh.write(canonical_json(doc) + "\n")
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        fh.write(canonical_json(stats) + "\n")
