"""Core data types and predicate semantics for the event bus.

Events are flat lists of (attribute, value) pairs; subscriptions are
conjunctions of predicates. Terms (attribute names and symbolic values) are
case-folded at parse time so synonym lookup is not defeated by capitalization.
Numbers are decimals compared exactly; a year range may end in "present",
which resolves against a configured current year rather than the wall clock.
"""

from __future__ import annotations

import enum
import json
import re
import time
import uuid
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Union

from .precision import PrecisionConfig, parse_precision, precision_to_json

Term = str

_YEAR_RANGE_RE = re.compile(r"^(\d{4})-(\d{4}|present)$")


class ParseError(ValueError):
    """Malformed event/subscription/ontology document; carries the offending path."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{message} (at {path})" if path else message)


def term(text: str) -> Term:
    """Normalize a term: trim and case-fold. Raises on empty."""
    if not isinstance(text, str):
        raise ValueError(f"term must be a string, got {type(text).__name__}")
    folded = text.strip().casefold()
    if not folded:
        raise ValueError("term must be non-empty")
    return folded


# ---------------------------------------------------------------------------
# Values


@dataclass(frozen=True)
class Symbol:
    text: Term


@dataclass(frozen=True)
class Number:
    value: Decimal


@dataclass(frozen=True)
class Bool:
    value: bool


@dataclass(frozen=True)
class YearRange:
    """Inclusive year interval; ``end=None`` means "present"."""

    start: int
    end: int | None

    def __post_init__(self) -> None:
        if self.end is not None and self.start > self.end:
            raise ValueError(f"year range start {self.start} after end {self.end}")

    def bounds(self, current_year: int | None = None) -> tuple[float, float]:
        """Resolved (start, end); an unresolved "present" is an open upper bound."""
        if self.end is not None:
            return (self.start, self.end)
        return (self.start, current_year if current_year is not None else float("inf"))


Value = Union[Symbol, Number, Bool, YearRange]

Pair = tuple[Term, Value]


def symbol(text: str) -> Symbol:
    return Symbol(term(text))


def number(x: int | str | Decimal) -> Number:
    return Number(Decimal(x))


# ---------------------------------------------------------------------------
# Events, predicates, subscriptions, notifications


@dataclass(frozen=True)
class Event:
    event_id: str
    pairs: tuple[Pair, ...]
    received_at: float = field(default=0.0, compare=False)

    def __post_init__(self) -> None:
        if not self.pairs:
            raise ValueError("empty event: at least one pair required")


class Op(enum.Enum):
    EQ = "="
    NEQ = "!="
    GE = ">="
    LE = "<="
    GT = ">"
    LT = "<"
    IN_RANGE = "in"


_ORDERING_OPS = frozenset({Op.GE, Op.LE, Op.GT, Op.LT})


@dataclass(frozen=True)
class Predicate:
    attribute: Term
    op: Op
    value: Value

    def __post_init__(self) -> None:
        if self.op in _ORDERING_OPS and not isinstance(self.value, Number):
            raise ValueError(f"operator {self.op.value} requires a numeric value")
        if self.op is Op.IN_RANGE and not isinstance(self.value, YearRange):
            raise ValueError("operator 'in' requires a year-range value")


@dataclass(frozen=True)
class Subscription:
    sub_id: str
    predicates: tuple[Predicate, ...]
    subscriber: str = ""
    precision: PrecisionConfig | None = None  # None: broker default applies

    def __post_init__(self) -> None:
        if not self.predicates:
            raise ValueError("empty subscription: at least one predicate required")


@dataclass(frozen=True)
class Notification:
    """One event matched one subscription; trace records the stages that fired."""

    event_id: str
    sub_id: str
    subscriber: str
    publisher: str
    trace: tuple[dict, ...]
    delivered_via: str

    def to_json(self) -> dict:
        return {
            "event_id": self.event_id,
            "sub_id": self.sub_id,
            "subscriber": self.subscriber,
            "publisher": self.publisher,
            "trace": [dict(record) for record in self.trace],
            "delivered_via": self.delivered_via,
            "dedupe_key": f"{self.event_id}:{self.sub_id}",
        }


# ---------------------------------------------------------------------------
# Predicate semantics

def values_equal(a: Value, b: Value, current_year: int | None = None) -> bool:
    """Exact same-type equality; year ranges compare on resolved bounds."""
    if type(a) is not type(b):
        return False
    if isinstance(a, YearRange):
        return a.bounds(current_year) == b.bounds(current_year)
    return a == b


def evaluate_predicate(p: Predicate, pair: Pair,
                       current_year: int | None = None) -> bool:
    """Total predicate check: attribute terms equal and the operator relation
    holds. Cross-type comparisons are false, never an error."""
    attr, value = pair
    if attr != p.attribute:
        return False
    if p.op is Op.EQ:
        return values_equal(value, p.value, current_year)
    if p.op is Op.NEQ:
        return type(value) is type(p.value) and not values_equal(value, p.value, current_year)
    if p.op in _ORDERING_OPS:
        if not isinstance(value, Number):
            return False
        ev, pv = value.value, p.value.value
        if p.op is Op.GE:
            return ev >= pv
        if p.op is Op.LE:
            return ev <= pv
        if p.op is Op.GT:
            return ev > pv
        return ev < pv
    # IN_RANGE: the event's range must lie inside the predicate's range.
    if not isinstance(value, YearRange):
        return False
    ev_start, ev_end = value.bounds(current_year)
    p_start, p_end = p.value.bounds(current_year)
    return p_start <= ev_start and ev_end <= p_end


def match_syntactic(s: Subscription, e: Event,
                    current_year: int | None = None) -> bool:
    """Pure conjunction: every predicate satisfied by at least one event pair."""
    return all(
        any(evaluate_predicate(p, pair, current_year) for pair in e.pairs)
        for p in s.predicates
    )


# ---------------------------------------------------------------------------
# Wire format
#
# event        = {"event_id"?, "pairs": [[attr, value], ...]}
# subscription = {"sub_id"?, "predicates": [[attr, op, value], ...], "precision"?}
# value tags: JSON number -> Number, JSON bool -> Bool,
#             "YYYY-YYYY"/"YYYY-present" -> YearRange, other strings -> Symbol.


def coerce_value(raw, path: str = "") -> Value:
    if isinstance(raw, bool):  # bool is an int subclass; check first
        return Bool(raw)
    if isinstance(raw, Decimal):
        return Number(raw)
    if isinstance(raw, int):
        return Number(Decimal(raw))
    if isinstance(raw, float):
        return Number(Decimal(str(raw)))
    if isinstance(raw, str):
        m = _YEAR_RANGE_RE.match(raw.strip())
        if m:
            start = int(m.group(1))
            end = None if m.group(2) == "present" else int(m.group(2))
            try:
                return YearRange(start, end)
            except ValueError as exc:
                raise ParseError(str(exc), path) from None
        try:
            return Symbol(term(raw))
        except ValueError as exc:
            raise ParseError(str(exc), path) from None
    raise ParseError(f"unsupported value type {type(raw).__name__}", path)


def value_to_json(v: Value):
    if isinstance(v, Symbol):
        return v.text
    if isinstance(v, Number):
        d = v.value
        return int(d) if d == d.to_integral_value() else float(d)
    if isinstance(v, Bool):
        return v.value
    return f"{v.start:04d}-{'present' if v.end is None else f'{v.end:04d}'}"


def _load_document(document) -> dict:
    if isinstance(document, (str, bytes)):
        try:
            decoded = json.loads(document, parse_float=Decimal)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}",
                             f"line {exc.lineno} column {exc.colno}") from None
        return decoded
    return document


def parse_event(document) -> Event:
    """Parse an event document (JSON text or decoded object)."""
    doc = _load_document(document)
    if not isinstance(doc, dict):
        raise ParseError("event must be a JSON object")
    raw_pairs = doc.get("pairs")
    if not isinstance(raw_pairs, list):
        raise ParseError("event requires a 'pairs' array", "pairs")
    if not raw_pairs:
        raise ParseError("empty event: 'pairs' must be non-empty", "pairs")
    pairs = []
    for i, entry in enumerate(raw_pairs):
        path = f"pairs[{i}]"
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            raise ParseError("pair must be [attribute, value]", path)
        attr_raw, value_raw = entry
        try:
            attr = term(attr_raw)
        except ValueError as exc:
            raise ParseError(str(exc), f"{path}[0]") from None
        pairs.append((attr, coerce_value(value_raw, f"{path}[1]")))
    event_id = doc.get("event_id")
    if event_id is None:
        event_id = uuid.uuid4().hex
    elif not isinstance(event_id, str) or not event_id:
        raise ParseError("event_id must be a non-empty string", "event_id")
    return Event(event_id=event_id, pairs=tuple(pairs), received_at=time.time())


def parse_subscription(document, subscriber: str = "") -> Subscription:
    """Parse a subscription document (JSON text or decoded object)."""
    doc = _load_document(document)
    if not isinstance(doc, dict):
        raise ParseError("subscription must be a JSON object")
    raw_preds = doc.get("predicates")
    if not isinstance(raw_preds, list):
        raise ParseError("subscription requires a 'predicates' array", "predicates")
    if not raw_preds:
        raise ParseError("empty subscription: 'predicates' must be non-empty", "predicates")
    predicates = []
    for i, entry in enumerate(raw_preds):
        path = f"predicates[{i}]"
        if not isinstance(entry, (list, tuple)) or len(entry) != 3:
            raise ParseError("predicate must be [attribute, op, value]", path)
        attr_raw, op_raw, value_raw = entry
        try:
            attr = term(attr_raw)
        except ValueError as exc:
            raise ParseError(str(exc), f"{path}[0]") from None
        try:
            op = Op(op_raw)
        except ValueError:
            raise ParseError(f"unknown operator {op_raw!r}", f"{path}[1]") from None
        value = coerce_value(value_raw, f"{path}[2]")
        try:
            predicates.append(Predicate(attr, op, value))
        except ValueError as exc:
            raise ParseError(str(exc), path) from None
    precision = None
    if "precision" in doc and doc["precision"] is not None:
        try:
            precision = parse_precision(doc["precision"])
        except ValueError as exc:
            raise ParseError(str(exc), "precision") from None
    sub_id = doc.get("sub_id")
    if sub_id is None:
        sub_id = uuid.uuid4().hex
    elif not isinstance(sub_id, str) or not sub_id:
        raise ParseError("sub_id must be a non-empty string", "sub_id")
    return Subscription(sub_id=sub_id, predicates=tuple(predicates),
                        subscriber=subscriber, precision=precision)


def event_to_json(e: Event) -> dict:
    return {
        "event_id": e.event_id,
        "pairs": [[attr, value_to_json(v)] for attr, v in e.pairs],
    }


def subscription_to_json(s: Subscription) -> dict:
    doc: dict = {
        "sub_id": s.sub_id,
        "predicates": [[p.attribute, p.op.value, value_to_json(p.value)]
                       for p in s.predicates],
    }
    if s.precision is not None:
        doc["precision"] = precision_to_json(s.precision)
    return doc


def canonical_json(obj) -> str:
    """Deterministic JSON text (sorted keys, tight separators, Decimal-safe)."""

    def default(o):
        if isinstance(o, Decimal):
            return int(o) if o == o.to_integral_value() else float(o)
        raise TypeError(f"not JSON serializable: {type(o).__name__}")

    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=default)
