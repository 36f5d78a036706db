"""Counting index: lifecycle, arity counting, precision filtering, and
equivalence with the index-free reference matcher."""

from __future__ import annotations

import random
import threading
from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sembus.matcher import DuplicateSubscription, PredicateIndex, oracle_match
from sembus.model import Number, Symbol, parse_event, parse_subscription
from sembus.ontology import Ontology
from sembus.pipeline import (
    SEMANTIC_DEFAULT,
    SYNTACTIC,
    PrecisionConfig,
    Stage,
    expand_event,
)

from .conftest import CANDIDATE_EVENT, DEMO_YEAR, RECRUITER_SUB
from .randgen import (
    closure_match,
    random_event,
    random_ontology,
    random_subscription,
)


def expand_plain(doc, ontology=None, precision=SYNTACTIC, year=DEMO_YEAR):
    o = ontology if ontology is not None else Ontology.empty()
    return expand_event(parse_event(doc), o, precision, year)


def sub(doc, sub_id="s1"):
    doc = dict(doc)
    doc.setdefault("sub_id", sub_id)
    return parse_subscription(doc)


class TestLifecycle:
    def test_add_get_contains_len(self):
        idx = PredicateIndex()
        s = sub({"predicates": [["a", "=", "x"]]})
        assert idx.add_subscription(s) == "s1"
        assert len(idx) == 1 and "s1" in idx
        assert idx.get("s1") is s
        assert idx.subscriptions() == [s]

    def test_duplicate_id_rejected(self):
        idx = PredicateIndex()
        idx.add_subscription(sub({"predicates": [["a", "=", "x"]]}))
        with pytest.raises(DuplicateSubscription):
            idx.add_subscription(sub({"predicates": [["b", ">", 1]]}))

    def test_remove_clears_every_posting(self):
        idx = PredicateIndex()
        idx.add_subscription(sub({"predicates": [
            ["a", "=", "x"], ["b", ">=", 3], ["c", "=", True]]}))
        assert idx.remove_subscription("s1") is True
        assert idx.remove_subscription("s1") is False
        assert len(idx) == 0
        e = expand_plain({"pairs": [["a", "x"], ["b", 5], ["c", True]]})
        assert idx.match(e, SYNTACTIC) == set()
        # And the internal postings are actually gone, not just masked.
        assert not idx._eq_index and not idx._attr_index

    def test_remove_keeps_other_subscribers(self):
        idx = PredicateIndex()
        idx.add_subscription(sub({"predicates": [["a", "=", "x"]]}, "s1"))
        idx.add_subscription(sub({"predicates": [["a", "=", "x"]]}, "s2"))
        idx.remove_subscription("s1")
        assert idx.match(expand_plain({"pairs": [["a", "x"]]}), SYNTACTIC) == {"s2"}


class TestCounting:
    def test_all_predicates_required(self):
        idx = PredicateIndex()
        idx.add_subscription(sub({"predicates": [
            ["a", "=", "x"], ["b", "=", "y"], ["c", "=", "z"]]}))
        partial = expand_plain({"pairs": [["a", "x"], ["b", "y"]]})
        assert idx.match(partial, SYNTACTIC) == set()
        full = expand_plain({"pairs": [["a", "x"], ["b", "y"], ["c", "z"]]})
        assert idx.match(full, SYNTACTIC) == {"s1"}

    def test_one_pair_may_satisfy_several_predicates(self):
        idx = PredicateIndex()
        idx.add_subscription(sub({"predicates": [
            ["n", ">=", 3], ["n", "<=", 9]]}))
        assert idx.match(expand_plain({"pairs": [["n", 5]]}), SYNTACTIC) == {"s1"}

    def test_same_attribute_predicates_checked_independently(self):
        # Two pairs on one attribute: each may satisfy a different predicate.
        idx = PredicateIndex()
        idx.add_subscription(sub({"predicates": [
            ["n", ">=", 10], ["n", "<=", 2]]}))
        e = expand_plain({"pairs": [["n", 1], ["n", 20]]})
        assert idx.match(e, SYNTACTIC) == {"s1"}
        assert idx.match(expand_plain({"pairs": [["n", 5]]}), SYNTACTIC) == set()

    def test_repeated_predicate_counts_once(self):
        idx = PredicateIndex()
        idx.add_subscription(sub({"predicates": [
            ["a", "=", "x"], ["a", "=", "x"]]}))
        assert idx.match(expand_plain({"pairs": [["a", "x"]]}),
                         SYNTACTIC) == {"s1"}

    def test_year_range_equality_depends_on_current_year(self):
        idx = PredicateIndex()
        idx.add_subscription(sub({"predicates": [["period", "=", "1999-present"]]}))
        e = parse_event({"pairs": [["period", "1999-2003"]]})
        hit = expand_event(e, Ontology.empty(), SYNTACTIC, 2003)
        miss = expand_event(e, Ontology.empty(), SYNTACTIC, 2004)
        assert idx.match(hit, SYNTACTIC, current_year=2003) == {"s1"}
        assert idx.match(miss, SYNTACTIC, current_year=2004) == set()


class TestPrecisionFiltering:
    def test_per_subscription_precision_blocks_derived_pairs(self, job_ontology):
        idx = PredicateIndex()
        semantic = sub({"predicates": [["professional experience", ">=", 4]]},
                       "wants-derived")
        literal = parse_subscription({
            "sub_id": "raw-only",
            "predicates": [["professional experience", ">=", 4]],
            "precision": {"stages": []}})
        idx.add_subscription(semantic)
        idx.add_subscription(literal)
        e = expand_plain(CANDIDATE_EVENT, job_ontology, SEMANTIC_DEFAULT)
        assert idx.match(e, SEMANTIC_DEFAULT, DEMO_YEAR) == {"wants-derived"}

    def test_per_subscription_generality_cap(self, vehicles_ontology):
        idx = PredicateIndex()
        idx.add_subscription(parse_subscription({
            "sub_id": "near", "predicates": [["kind", "=", "vehicle"]],
            "precision": {"max_generality": 1}}))
        idx.add_subscription(sub({"predicates": [["kind", "=", "vehicle"]]},
                                 "far"))
        e = expand_plain({"pairs": [["kind", "sedan"]]}, vehicles_ontology,
                         SEMANTIC_DEFAULT)
        assert idx.match(e, SEMANTIC_DEFAULT, DEMO_YEAR) == {"far"}

    def test_asymmetry_generalized_event_never_reaches_special_sub(
            self, vehicles_ontology):
        idx = PredicateIndex()
        idx.add_subscription(sub({"predicates": [["kind", "=", "sedan"]]}))
        e = expand_plain({"pairs": [["kind", "vehicle"]]}, vehicles_ontology,
                         SEMANTIC_DEFAULT)
        assert idx.match(e, SEMANTIC_DEFAULT, DEMO_YEAR) == set()


class TestMatchDetails:
    def test_golden_trace(self, job_ontology):
        idx = PredicateIndex()
        from sembus.pipeline import normalize_subscription
        idx.add_subscription(
            normalize_subscription(parse_subscription(RECRUITER_SUB),
                                   job_ontology))
        e = expand_plain(CANDIDATE_EVENT, job_ontology, SEMANTIC_DEFAULT)
        details = idx.match_details(e, SEMANTIC_DEFAULT, DEMO_YEAR)
        assert [d.sub_id for d in details] == [RECRUITER_SUB["sub_id"]]
        d = details[0]
        assert ("professional experience", Number(Decimal(13))) in d.pairs
        stages = {r.stage for r in d.trace}
        assert Stage.SYNONYM in stages and Stage.MAPPING in stages
        if d.trace:
            assert d.generality_used == max(r.hops for r in d.trace)

    def test_raw_match_has_empty_trace(self):
        idx = PredicateIndex()
        idx.add_subscription(sub({"predicates": [["a", "=", "x"]]}))
        details = idx.match_details(expand_plain({"pairs": [["a", "x"]]}),
                                    SYNTACTIC)
        assert details[0].trace == ()
        assert details[0].generality_used == 0

    def test_details_agree_with_match(self, job_ontology):
        rng = random.Random(11)
        onto, doc = random_ontology(rng, n_terms=8, max_mappings=2)
        idx = PredicateIndex()
        subs = [random_subscription(rng, doc, f"s{i}") for i in range(40)]
        for s in subs:
            idx.add_subscription(s)
        for j in range(40):
            e = expand_event(random_event(rng, doc, f"e{j}"), onto,
                             SEMANTIC_DEFAULT, DEMO_YEAR)
            matched = idx.match(e, SEMANTIC_DEFAULT, DEMO_YEAR)
            detailed = {d.sub_id for d in idx.match_details(
                e, SEMANTIC_DEFAULT, DEMO_YEAR)}
            assert matched == detailed


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_index_equals_nested_loop_oracle(seed):
    rng = random.Random(seed)
    onto, doc = random_ontology(rng, n_terms=8, max_mappings=2)
    idx = PredicateIndex()
    subs = [random_subscription(rng, doc, f"s{i}")
            for i in range(rng.randint(1, 30))]
    for s in subs:
        idx.add_subscription(s)
    default = SEMANTIC_DEFAULT
    for j in range(5):
        e = expand_event(random_event(rng, doc, f"e{j}"), onto, default,
                         DEMO_YEAR)
        assert idx.match(e, default, DEMO_YEAR) == oracle_match(
            subs, e, default, DEMO_YEAR)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_index_agrees_with_independent_closure_matcher(seed):
    """End-to-end check against the from-scratch closure decision, which
    never looks at DerivedEvent internals."""
    rng = random.Random(seed)
    onto, doc = random_ontology(rng, n_terms=7, max_mappings=2)
    subs = [random_subscription(rng, doc, f"s{i}")
            for i in range(rng.randint(1, 15))]
    idx = PredicateIndex()
    for s in subs:
        idx.add_subscription(s)
    cfg = PrecisionConfig(max_passes=16)
    for j in range(4):
        e = random_event(rng, doc, f"e{j}")
        expanded = expand_event(e, onto, cfg, DEMO_YEAR)
        got = idx.match(expanded, cfg, DEMO_YEAR)
        want = {s.sub_id for s in subs
                if closure_match(s, e, onto, cfg, DEMO_YEAR)}
        assert got == want


def test_concurrent_updates_and_matches_stay_consistent():
    idx = PredicateIndex()
    stop = threading.Event()
    errors: list[BaseException] = []
    e = expand_plain({"pairs": [["a", "x"], ["n", 5]]})

    def writer():
        try:
            i = 0
            while not stop.is_set():
                sid = f"w{i}"
                idx.add_subscription(sub({"predicates": [["a", "=", "x"]]}, sid))
                idx.remove_subscription(sid)
                i += 1
        except BaseException as exc:  # pragma: no cover - failure path
            errors.append(exc)

    def reader():
        try:
            while not stop.is_set():
                for sid in idx.match(e, SYNTACTIC):
                    assert sid.startswith("w")
        except BaseException as exc:  # pragma: no cover - failure path
            errors.append(exc)

    threads = [threading.Thread(target=writer), threading.Thread(target=reader)]
    for t in threads:
        t.start()
    import time
    time.sleep(0.4)
    stop.set()
    for t in threads:
        t.join(timeout=5)
    assert not errors
    assert len(idx) == 0
