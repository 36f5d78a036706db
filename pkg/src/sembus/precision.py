"""Per-subscriber precision controls: which semantic stages may contribute to a
match and how far up the taxonomy a derived pair may have travelled.

Shared by the model (subscriptions carry a config) and the pipeline (expansion
and admissibility read it); re-exported from :mod:`sembus.pipeline`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

DEFAULT_MAX_PASSES = 4


class Stage(enum.Enum):
    SYNONYM = "synonym"
    HIERARCHY = "hierarchy"
    MAPPING = "mapping"


ALL_STAGES = frozenset(Stage)


@dataclass(frozen=True)
class PrecisionConfig:
    """How much semantic rewriting a subscriber tolerates.

    ``max_generality=None`` means unbounded taxonomy hops. ``max_passes``
    bounds the expansion fixpoint loop and is only meaningful for the
    broker-global config.
    """

    stages: frozenset[Stage] = field(default=ALL_STAGES)
    max_generality: int | None = None
    max_passes: int = DEFAULT_MAX_PASSES

    def __post_init__(self) -> None:
        if (Stage.HIERARCHY in self.stages or Stage.MAPPING in self.stages) \
                and Stage.SYNONYM not in self.stages:
            raise ValueError(
                "hierarchy/mapping stages operate on synonym roots; "
                "enabling them requires the synonym stage")
        if self.max_generality is not None and self.max_generality < 0:
            raise ValueError("max_generality must be non-negative")
        if self.max_passes < 1:
            raise ValueError("max_passes must be positive")


SYNTACTIC = PrecisionConfig(stages=frozenset())
SEMANTIC_DEFAULT = PrecisionConfig()


def parse_precision(doc: dict) -> PrecisionConfig:
    """Build a PrecisionConfig from its JSON form.

    ``{"stages": ["synonym", ...], "max_generality": 2, "max_passes": 4}``;
    a missing/null max_generality means unbounded.
    """
    if not isinstance(doc, dict):
        raise ValueError(f"precision must be an object, got {type(doc).__name__}")
    try:
        stages = frozenset(Stage(name) for name in doc.get("stages", []))
    except ValueError as exc:
        raise ValueError(f"unknown precision stage: {exc}") from None
    max_generality = doc.get("max_generality")
    if max_generality is not None:
        max_generality = int(max_generality)
    max_passes = int(doc.get("max_passes", DEFAULT_MAX_PASSES))
    return PrecisionConfig(stages=stages, max_generality=max_generality,
                           max_passes=max_passes)


def precision_to_json(cfg: PrecisionConfig) -> dict:
    doc: dict = {"stages": sorted(stage.value for stage in cfg.stages)}
    if cfg.max_generality is not None:
        doc["max_generality"] = cfg.max_generality
    if cfg.max_passes != DEFAULT_MAX_PASSES:
        doc["max_passes"] = cfg.max_passes
    return doc
