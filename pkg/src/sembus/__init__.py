"""Content-based publish/subscribe with pluggable semantic matching.

The core pipeline rewrites events against a domain ontology (synonyms, an
is-a concept hierarchy, and mapping functions) before a counting-based
predicate index decides which subscriptions fire. A broker, an HTTP front
end, and a workload generator sit on top.
"""

from .model import (
    Bool,
    Event,
    Notification,
    Number,
    Op,
    Pair,
    ParseError,
    Predicate,
    Subscription,
    Symbol,
    Term,
    Value,
    YearRange,
    canonical_json,
    coerce_value,
    evaluate_predicate,
    event_to_json,
    match_syntactic,
    parse_event,
    parse_subscription,
    subscription_to_json,
    term,
    value_to_json,
    values_equal,
)
from .ontology import (
    MappingFunction,
    Ontology,
    OntologyError,
    load_ontology,
    load_ontology_documents,
    load_ontology_files,
)
from .precision import (
    ALL_STAGES,
    SEMANTIC_DEFAULT,
    SYNTACTIC,
    PrecisionConfig,
    Stage,
    parse_precision,
    precision_to_json,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_STAGES",
    "Bool",
    "Event",
    "MappingFunction",
    "Notification",
    "Number",
    "Ontology",
    "OntologyError",
    "Op",
    "Pair",
    "ParseError",
    "Predicate",
    "PrecisionConfig",
    "SEMANTIC_DEFAULT",
    "SYNTACTIC",
    "Stage",
    "Subscription",
    "Symbol",
    "Term",
    "Value",
    "YearRange",
    "canonical_json",
    "coerce_value",
    "evaluate_predicate",
    "event_to_json",
    "load_ontology",
    "load_ontology_documents",
    "load_ontology_files",
    "match_syntactic",
    "parse_event",
    "parse_subscription",
    "subscription_to_json",
    "term",
    "value_to_json",
    "values_equal",
]
