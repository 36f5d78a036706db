"""Domain knowledge store: synonym sets, a concept hierarchy, and mapping
functions, each behind hash-keyed lookup.

Synonym sets map every member term to a designated root (the first element of
the set in the file). The hierarchy is a DAG of is-a edges over root terms;
more general terms sit higher. Mapping functions are guarded many-to-many
rewrites whose outputs are built by a tiny expression language supporting
``+``/``-`` over numbers, value captures (``$k``) and ``CURRENT_YEAR``.

Ontologies are immutable after load and shared read-only.
"""

from __future__ import annotations

import itertools
import json
import logging
import re
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Iterable, Sequence

from .model import (
    Bool,
    Number,
    Pair,
    Symbol,
    Term,
    Value,
    YearRange,
    coerce_value,
    term,
    values_equal,
)

log = logging.getLogger(__name__)

_CAPTURE_RE = re.compile(r"^\$(\d+)$")
_SPLIT_RE = re.compile(r"\s+([+-])\s+")


class OntologyError(ValueError):
    """Invalid ontology document; message names the offending entry."""


# ---------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class Capture:
    slot: int


@dataclass(frozen=True)
class CurrentYear:
    pass


Operand = object  # Value | Capture | CurrentYear


@dataclass(frozen=True)
class Expr:
    """``operand (("+"|"-") operand)*``; arithmetic only over numbers.

    Operators must be whitespace-separated so hyphens inside symbols and
    year-range literals stay part of the literal.
    """

    operands: tuple[Operand, ...]
    operators: tuple[str, ...]
    text: str

    @property
    def is_arithmetic(self) -> bool:
        return bool(self.operators)

    def capture_slots(self) -> set[int]:
        return {op.slot for op in self.operands if isinstance(op, Capture)}


def parse_expr(text: str) -> Expr:
    if not isinstance(text, str) or not text.strip():
        raise OntologyError("empty expression")
    parts = _SPLIT_RE.split(text.strip())
    operand_texts, operators = parts[0::2], parts[1::2]
    operands = []
    for part in operand_texts:
        if not part:
            raise OntologyError(f"malformed expression {text!r}")
        operands.append(_parse_operand(part))
    return Expr(tuple(operands), tuple(operators), text)


def _parse_operand(token: str) -> Operand:
    token = token.strip()
    if token == "CURRENT_YEAR":
        return CurrentYear()
    m = _CAPTURE_RE.match(token)
    if m:
        return Capture(int(m.group(1)))
    if token == "true":
        return Bool(True)
    if token == "false":
        return Bool(False)
    try:
        return Number(Decimal(token))
    except ArithmeticError:
        pass
    value = coerce_value(token)
    return value


def _check_expr_types(expr: Expr, entry: str) -> set[int]:
    """Arithmetic operands must be numbers; returns capture slots that must
    therefore bind numeric values."""
    number_slots: set[int] = set()
    if not expr.is_arithmetic:
        return number_slots
    for op in expr.operands:
        if isinstance(op, Capture):
            number_slots.add(op.slot)
        elif isinstance(op, CurrentYear) or isinstance(op, Number):
            continue
        else:
            raise OntologyError(
                f"{entry}: arithmetic over non-numeric operand in {expr.text!r}")
    return number_slots


def evaluate_expr(expr: Expr, captures: dict[int, Value],
                  current_year: int) -> Value:
    def resolve(op) -> Value:
        if isinstance(op, Capture):
            return captures[op.slot]
        if isinstance(op, CurrentYear):
            return Number(Decimal(current_year))
        return op

    first = resolve(expr.operands[0])
    if not expr.is_arithmetic:
        return first
    acc = first.value  # Number guaranteed by load-time typing
    for operator, operand in zip(expr.operators, expr.operands[1:]):
        rhs = resolve(operand).value
        acc = acc + rhs if operator == "+" else acc - rhs
    return Number(acc)


# ---------------------------------------------------------------------------
# Mapping functions


@dataclass(frozen=True)
class InputPattern:
    attribute: Term
    constraint: tuple[str, Value] | None = None  # ("=", v) | ("in", YearRange)
    capture: int | None = None
    number_only: bool = False  # capture feeds arithmetic

    def matches(self, pair: Pair, current_year: int | None = None) -> bool:
        attr, value = pair
        if attr != self.attribute:
            return False
        if self.number_only and not isinstance(value, Number):
            return False
        if self.constraint is None:
            return True
        op, wanted = self.constraint
        if op == "=":
            return values_equal(value, wanted, current_year)
        if not isinstance(value, YearRange):
            return False
        ev_start, ev_end = value.bounds(current_year)
        w_start, w_end = wanted.bounds(current_year)
        return w_start <= ev_start and ev_end <= w_end


@dataclass(frozen=True)
class MappingFunction:
    name: str
    inputs: tuple[InputPattern, ...]
    outputs: tuple[tuple[Term, Expr], ...]
    domain: str = ""


# ---------------------------------------------------------------------------
# Ontology


@dataclass(frozen=True, eq=False)
class Ontology:
    synonyms: dict[Term, Term]
    parents: dict[Term, tuple[Term, ...]]
    mappings: tuple[MappingFunction, ...] = ()
    mapping_index: dict[Term, tuple[MappingFunction, ...]] = field(default_factory=dict)
    domains: tuple[str, ...] = ()

    @classmethod
    def empty(cls) -> Ontology:
        return cls(synonyms={}, parents={})

    def root_of(self, t: Term) -> Term:
        """Synonym root of t, or t itself when t is in no synonym set."""
        return self.synonyms.get(t, t)

    def ancestors(self, t: Term, max_hops: int | None = None) -> list[tuple[Term, int]]:
        """Breadth-first ancestor closure of t (excluded), each term at its
        minimal hop distance, capped at max_hops when given."""
        if max_hops is not None and max_hops <= 0:
            return []
        seen: dict[Term, int] = {t: 0}
        out: list[tuple[Term, int]] = []
        frontier = [t]
        hops = 0
        while frontier and (max_hops is None or hops < max_hops):
            hops += 1
            nxt: list[Term] = []
            for node in frontier:
                for parent in self.parents.get(node, ()):
                    if parent not in seen:
                        seen[parent] = hops
                        out.append((parent, hops))
                        nxt.append(parent)
            frontier = nxt
        return out

    def is_specialization_of(self, a: Term, b: Term) -> bool:
        """True iff a is b or b is an ancestor of a (asymmetric otherwise)."""
        if a == b:
            return True
        return any(anc == b for anc, _ in self.ancestors(a))

    def applicable_mappings(self, pairs: Sequence[Pair],
                            current_year: int | None = None) -> list[MappingFunction]:
        """Mappings whose full input pattern set is satisfiable by the pairs,
        found via the trigger-attribute index."""
        attrs = {attr for attr, _ in pairs}
        candidates = set()
        for attr in attrs:
            candidates.update(f.name for f in self.mapping_index.get(attr, ()))
        out = []
        for f in self.mappings:
            if f.name not in candidates:
                continue
            if all(any(p.matches(pair, current_year) for pair in pairs)
                   for p in f.inputs):
                out.append(f)
        return out

    def mapping_applications(
        self, f: MappingFunction, pairs: Sequence[Pair],
        current_year: int,
    ) -> list[tuple[tuple[int, ...], list[Pair]]]:
        """All firings of f against the pairs, one per way of binding its
        input patterns. Each firing is (indices of the pairs bound, derived
        output pairs)."""
        per_pattern: list[list[int]] = []
        for pattern in f.inputs:
            idxs = [i for i, pair in enumerate(pairs)
                    if pattern.matches(pair, current_year)]
            if not idxs:
                return []
            per_pattern.append(idxs)
        firings: list[tuple[tuple[int, ...], list[Pair]]] = []
        for combo in itertools.product(*per_pattern):
            captures: dict[int, Value] = {}
            for pattern, idx in zip(f.inputs, combo):
                if pattern.capture is not None:
                    captures[pattern.capture] = pairs[idx][1]
            outputs = [(attr, evaluate_expr(expr, captures, current_year))
                       for attr, expr in f.outputs]
            firings.append((tuple(sorted(set(combo))), outputs))
        return firings

    def apply_mapping(self, f: MappingFunction, pairs: Sequence[Pair],
                      current_year: int) -> list[Pair]:
        """Derived pairs from every firing of f; inputs are not consumed."""
        out: list[Pair] = []
        seen: set[Pair] = set()
        for _, outputs in self.mapping_applications(f, pairs, current_year):
            for pair in outputs:
                if pair not in seen:
                    seen.add(pair)
                    out.append(pair)
        return out


# ---------------------------------------------------------------------------
# Loading
#
# File format (JSON):
# {"domain": name,
#  "synonyms": [[root, alias, ...], ...],
#  "hierarchy": [{"child": t, "parent": t}, ...],
#  "mappings": [{"name": n,
#                "inputs": [{"attr": t, "op"?: "="|"in", "value"?: v, "capture"?: k}],
#                "outputs": [{"attr": t, "expr": "CURRENT_YEAR - $1"}]}]}


def load_ontology(document) -> Ontology:
    """Load and validate a single ontology document (JSON text or dict)."""
    return load_ontology_documents([document])


def load_ontology_files(paths: Iterable[str | Path]) -> Ontology:
    docs = []
    for path in paths:
        docs.append(json.loads(Path(path).read_text()))
    return load_ontology_documents(docs)


def load_ontology_documents(documents: Iterable) -> Ontology:
    """Merge one or more ontology documents into a single validated Ontology."""
    docs = []
    for doc in documents:
        if isinstance(doc, (str, bytes)):
            doc = json.loads(doc)
        if not isinstance(doc, dict):
            raise OntologyError("ontology document must be a JSON object")
        docs.append(doc)

    synonyms = _build_synonyms(docs)

    def root_of(t: Term) -> Term:
        return synonyms.get(t, t)

    parents = _build_hierarchy(docs, root_of)
    mappings = _build_mappings(docs, root_of)

    mapping_index: dict[Term, list[MappingFunction]] = {}
    for f in mappings:
        for pattern in f.inputs:
            mapping_index.setdefault(pattern.attribute, [])
            if f not in mapping_index[pattern.attribute]:
                mapping_index[pattern.attribute].append(f)

    # Exhaustive idempotence check: every stored root is a fixed point.
    for member, root in synonyms.items():
        assert synonyms.get(root, root) == root, (member, root)

    _warn_attr_value_collisions(mappings)

    return Ontology(
        synonyms=synonyms,
        parents=parents,
        mappings=tuple(mappings),
        mapping_index={a: tuple(fs) for a, fs in mapping_index.items()},
        domains=tuple(str(doc.get("domain", "")) for doc in docs),
    )


def _build_synonyms(docs: list[dict]) -> dict[Term, Term]:
    synonyms: dict[Term, Term] = {}
    for doc in docs:
        domain = doc.get("domain", "")
        for raw_set in doc.get("synonyms", []):
            if not isinstance(raw_set, list) or not raw_set:
                raise OntologyError(f"domain {domain!r}: synonym set must be a non-empty list")
            members = [term(t) for t in raw_set]
            root = members[0]
            for member in members:
                existing = synonyms.get(member)
                if existing is not None and existing != root:
                    raise OntologyError(
                        f"domain {domain!r}: term {member!r} belongs to more than one synonym set")
                synonyms[member] = root
    return synonyms


def _build_hierarchy(docs: list[dict], root_of) -> dict[Term, tuple[Term, ...]]:
    parents: dict[Term, list[Term]] = {}
    for doc in docs:
        domain = doc.get("domain", "")
        for edge in doc.get("hierarchy", []):
            if not isinstance(edge, dict) or "child" not in edge or "parent" not in edge:
                raise OntologyError(f"domain {domain!r}: hierarchy edge needs child and parent")
            child = root_of(term(edge["child"]))
            parent = root_of(term(edge["parent"]))
            if child == parent:
                raise OntologyError(
                    f"domain {domain!r}: cycle, {child!r} is its own parent")
            bucket = parents.setdefault(child, [])
            if parent not in bucket:
                bucket.append(parent)
    frozen = {child: tuple(ps) for child, ps in parents.items()}
    _check_acyclic(frozen)
    return frozen


def _check_acyclic(parents: dict[Term, tuple[Term, ...]]) -> None:
    WHITE, GREY, BLACK = 0, 1, 2
    color: dict[Term, int] = {}

    def visit(node: Term) -> None:
        color[node] = GREY
        for parent in parents.get(node, ()):
            state = color.get(parent, WHITE)
            if state == GREY:
                raise OntologyError(f"cycle in concept hierarchy involving {parent!r}")
            if state == WHITE:
                visit(parent)
        color[node] = BLACK

    for node in parents:
        if color.get(node, WHITE) == WHITE:
            visit(node)


def _build_mappings(docs: list[dict], root_of) -> list[MappingFunction]:
    mappings: list[MappingFunction] = []
    names: set[str] = set()
    for doc in docs:
        domain = str(doc.get("domain", ""))
        for raw in doc.get("mappings", []):
            name = raw.get("name")
            if not name:
                raise OntologyError(f"domain {domain!r}: mapping requires a name")
            if name in names:
                raise OntologyError(f"duplicate mapping name {name!r}")
            names.add(name)
            mappings.append(_build_mapping(raw, name, domain, root_of))
    return mappings


def _build_mapping(raw: dict, name: str, domain: str, root_of) -> MappingFunction:
    raw_inputs = raw.get("inputs")
    raw_outputs = raw.get("outputs")
    if not raw_inputs:
        raise OntologyError(f"mapping {name!r}: inputs must be non-empty")
    if not raw_outputs:
        raise OntologyError(f"mapping {name!r}: outputs must be non-empty")

    outputs: list[tuple[Term, Expr]] = []
    number_slots: set[int] = set()
    referenced: set[int] = set()
    for raw_out in raw_outputs:
        attr = root_of(term(raw_out["attr"]))
        try:
            expr = parse_expr(raw_out["expr"])
        except OntologyError as exc:
            raise OntologyError(f"mapping {name!r}: {exc}") from None
        number_slots.update(_check_expr_types(expr, f"mapping {name!r}"))
        referenced.update(expr.capture_slots())
        # Normalize symbol literals to their synonym roots so derived pairs
        # always carry root terms.
        expr = Expr(
            tuple(Symbol(root_of(op.text)) if isinstance(op, Symbol) else op
                  for op in expr.operands),
            expr.operators, expr.text)
        outputs.append((attr, expr))

    patterns: list[InputPattern] = []
    bound: set[int] = set()
    for raw_in in raw_inputs:
        attr = root_of(term(raw_in["attr"]))
        capture = raw_in.get("capture")
        if capture is not None:
            capture = int(capture)
            if capture in bound:
                raise OntologyError(
                    f"mapping {name!r}: capture slot {capture} bound by more than one input")
            bound.add(capture)
        constraint = None
        op = raw_in.get("op")
        if op is not None:
            if op not in ("=", "in"):
                raise OntologyError(f"mapping {name!r}: unknown input op {op!r}")
            value = coerce_value(raw_in.get("value"))
            if isinstance(value, Symbol):
                value = Symbol(root_of(value.text))
            if op == "in" and not isinstance(value, YearRange):
                raise OntologyError(
                    f"mapping {name!r}: 'in' constraint requires a year range")
            constraint = (op, value)
        number_only = capture is not None and capture in number_slots
        if number_only and constraint is not None and not isinstance(constraint[1], Number):
            raise OntologyError(
                f"mapping {name!r}: capture ${capture} feeds arithmetic but its "
                f"constraint is not numeric")
        patterns.append(InputPattern(attribute=attr, constraint=constraint,
                                     capture=capture, number_only=number_only))

    unbound = referenced - bound
    if unbound:
        raise OntologyError(
            f"mapping {name!r}: unbound capture slot {sorted(unbound)[0]}")

    return MappingFunction(name=name, inputs=tuple(patterns),
                           outputs=tuple(outputs), domain=domain)


def _warn_attr_value_collisions(mappings: list[MappingFunction]) -> None:
    attrs: set[Term] = set()
    value_terms: set[Term] = set()
    for f in mappings:
        for pattern in f.inputs:
            attrs.add(pattern.attribute)
            if pattern.constraint and isinstance(pattern.constraint[1], Symbol):
                value_terms.add(pattern.constraint[1].text)
        for attr, expr in f.outputs:
            attrs.add(attr)
            for op in expr.operands:
                if isinstance(op, Symbol):
                    value_terms.add(op.text)
    for collision in sorted(attrs & value_terms):
        log.warning("term %r is used both as an attribute and as a value", collision)
