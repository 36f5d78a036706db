"""Matching benchmark: counting index versus the index-free reference.

Builds an equality-heavy workload (the index's sweet spot), times both
matchers on identical expanded events, and reports medians plus the speedup.
CSV columns: subscriptions, events, mode, median_match_micros.
"""

from __future__ import annotations

import argparse
import csv
import random
import statistics
import time
from decimal import Decimal
from pathlib import Path

from .matcher import PredicateIndex, oracle_match
from .model import Event, Number, Op, Predicate, Subscription, Symbol
from .ontology import Ontology
from .pipeline import SEMANTIC_DEFAULT, SYNTACTIC, expand_event


def build_workload(seed: int, n_subs: int, n_events: int, n_attrs: int = 40,
                   n_terms: int = 150) -> tuple[list[Subscription], list[Event]]:
    rng = random.Random(seed)
    attrs = [f"attr{i:02d}" for i in range(n_attrs)]
    words = [f"term{i:03d}" for i in range(n_terms)]

    def value():
        if rng.random() < 0.8:
            return Symbol(rng.choice(words))
        return Number(Decimal(rng.randint(0, 500)))

    subs = []
    for i in range(n_subs):
        chosen = rng.sample(attrs, rng.randint(1, 4))
        predicates = tuple(Predicate(a, Op.EQ, value()) for a in chosen)
        subs.append(Subscription(sub_id=f"bench-{i:06d}", predicates=predicates))
    events = []
    for i in range(n_events):
        chosen = rng.sample(attrs, rng.randint(4, 8))
        pairs = tuple((a, value()) for a in chosen)
        events.append(Event(event_id=f"bench-evt-{i:04d}", pairs=pairs))
    return subs, events


def run(n_subs: int = 10_000, n_events: int = 50, seed: int = 7) -> dict:
    subs, events = build_workload(seed, n_subs, n_events)
    index = PredicateIndex()
    for s in subs:
        index.add_subscription(s)
    onto = Ontology.empty()
    expanded = [expand_event(e, onto, SYNTACTIC, 2003) for e in events]

    indexed_micros: list[float] = []
    indexed_results: list[set] = []
    for de in expanded:
        t0 = time.perf_counter()
        result = index.match(de, SEMANTIC_DEFAULT, 2003)
        indexed_micros.append((time.perf_counter() - t0) * 1e6)
        indexed_results.append(result)

    store = index.subscriptions()
    oracle_micros: list[float] = []
    agree = True
    for de, expected in zip(expanded, indexed_results):
        t0 = time.perf_counter()
        result = oracle_match(store, de, SEMANTIC_DEFAULT, 2003)
        oracle_micros.append((time.perf_counter() - t0) * 1e6)
        agree = agree and result == expected

    indexed_median = statistics.median(indexed_micros)
    oracle_median = statistics.median(oracle_micros)
    return {
        "subscriptions": n_subs,
        "events": n_events,
        "seed": seed,
        "indexed_median_us": round(indexed_median, 1),
        "oracle_median_us": round(oracle_median, 1),
        "speedup": round(oracle_median / indexed_median, 1) if indexed_median else 0.0,
        "results_equal": agree,
    }


def write_csv(path: str | Path, result: dict) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subscriptions", "events", "mode",
                         "median_match_micros"])
        writer.writerow([result["subscriptions"], result["events"], "indexed",
                         result["indexed_median_us"]])
        writer.writerow([result["subscriptions"], result["events"], "oracle",
                         result["oracle_median_us"]])


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sembus-bench",
        description="Compare indexed matching against the brute-force reference.")
    parser.add_argument("--subs", type=int, default=10_000)
    parser.add_argument("--events", type=int, default=50)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out", type=Path, default=None, metavar="CSV")
    args = parser.parse_args(argv)

    result = run(args.subs, args.events, args.seed)
    if args.out is not None:
        write_csv(args.out, result)
    print(f"subscriptions={result['subscriptions']} events={result['events']}")
    print(f"indexed median: {result['indexed_median_us']:.1f} us")
    print(f"oracle  median: {result['oracle_median_us']:.1f} us")
    print(f"speedup: {result['speedup']:.1f}x  "
          f"(results {'agree' if result['results_equal'] else 'DISAGREE'})")
    return 0 if result["results_equal"] else 1


if __name__ == "__main__":
    raise SystemExit(main())
