"""Entailment-based evaluation of open-domain QA answers."""

from entail_eval.model import (
    BackendConfig,
    EntailmentLabel,
    EvalItem,
    EvalRecord,
    HierarchyRank,
    JudgePolicy,
    Scheme,
    rank_from_flags,
)

__version__ = "0.1.0"

__all__ = [
    "BackendConfig",
    "EntailmentLabel",
    "EvalItem",
    "EvalRecord",
    "HierarchyRank",
    "JudgePolicy",
    "Scheme",
    "rank_from_flags",
]
