"""Domain types shared by the whole pipeline.

Everything here is an immutable value object. No I/O and no inference.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum, IntEnum
from typing import Optional

from entail_eval.errors import ValidationError

INFO_MARKER = "[[INFO]]"
ASSUMPTION_MARKER = "[[ASSUMPTION]]"


@dataclass(frozen=True)
class EvalItem:
    """One system answer to one question, with the gold answers it is judged against."""

    id: str
    question: str
    gold_answers: tuple[str, ...]
    system_name: str
    system_answer: str
    human_judgment: Optional[bool] = None

    def __post_init__(self) -> None:
        # accept any sequence for convenience, store a tuple
        object.__setattr__(self, "gold_answers", tuple(self.gold_answers))
        if not str(self.id):
            raise ValidationError("id must be non-empty")
        if not self.question.strip():
            raise ValidationError("question must be non-empty")
        if not self.system_answer.strip():
            raise ValidationError("system_answer must be non-empty")
        if not self.gold_answers:
            raise ValidationError("gold_answers must contain at least one answer")
        for gold in self.gold_answers:
            if not isinstance(gold, str) or not gold.strip():
                raise ValidationError("gold answers must be non-empty strings")
        if self.human_judgment is not None and not isinstance(self.human_judgment, bool):
            raise ValidationError("human_judgment must be a boolean or null")

    @property
    def key(self) -> tuple[str, str]:
        return (self.id, self.system_name)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "question": self.question,
            "gold_answers": list(self.gold_answers),
            "system_name": self.system_name,
            "system_answer": self.system_answer,
            "human_judgment": self.human_judgment,
        }


class Source(str, Enum):
    GOLD = "gold"
    SYSTEM = "system"


@dataclass(frozen=True)
class Statement:
    """Declarative rewrite of a (question, answer) pair."""

    text: str
    source: Source
    origin_item: str
    transcript: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValidationError("statement text must be non-empty")
        if not isinstance(self.source, Source):
            raise ValidationError(f"invalid statement source {self.source!r}")


class EntailmentLabel(str, Enum):
    ENTAILMENT = "entailment"
    CONTRADICTION = "contradiction"
    NEUTRAL = "neutral"

    @property
    def entails(self) -> bool:
        # contradiction and neutral both count as "does not entail"
        return self is EntailmentLabel.ENTAILMENT


@dataclass(frozen=True)
class DirectionalEntailment:
    """Labels for both directions between one gold statement and the system statement."""

    gold_entails_system: EntailmentLabel
    system_entails_gold: EntailmentLabel
    gold_answer: str = ""
    transcripts: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for label in (self.gold_entails_system, self.system_entails_gold):
            if not isinstance(label, EntailmentLabel):
                raise ValidationError(f"invalid entailment label {label!r}")


class HierarchyRank(IntEnum):
    """Position of a system answer in the answer hierarchy.

    1: more specific than gold only, 2: equivalent, 3: more general only, 4: neither.
    """

    SUP_ONLY = 1
    EQUIVALENT = 2
    INF_ONLY = 3
    NEITHER = 4

    @property
    def in_sup(self) -> bool:
        return self in (HierarchyRank.SUP_ONLY, HierarchyRank.EQUIVALENT)

    @property
    def in_inf(self) -> bool:
        return self in (HierarchyRank.EQUIVALENT, HierarchyRank.INF_ONLY)


def rank_from_flags(in_sup: bool, in_inf: bool) -> HierarchyRank:
    if in_sup and not in_inf:
        return HierarchyRank.SUP_ONLY
    if in_sup and in_inf:
        return HierarchyRank.EQUIVALENT
    if in_inf:
        return HierarchyRank.INF_ONLY
    return HierarchyRank.NEITHER


class JudgePolicy(str, Enum):
    """Which hierarchy ranks count as a correct answer."""

    UNION = "union"
    STRICT = "strict"

    def accepts(self, rank: HierarchyRank) -> bool:
        if self is JudgePolicy.UNION:
            return rank is not HierarchyRank.NEITHER
        return rank in (HierarchyRank.SUP_ONLY, HierarchyRank.EQUIVALENT)


@dataclass(frozen=True)
class Judgment:
    correct: bool
    policy: JudgePolicy
    rank: HierarchyRank

    def __post_init__(self) -> None:
        if self.correct != self.policy.accepts(self.rank):
            raise ValidationError(
                f"judgment {self.correct} inconsistent with rank {int(self.rank)} "
                f"under {self.policy.value}"
            )


@dataclass(frozen=True)
class InferenceExplanation:
    """A parsed step-by-step explanation of how one statement follows from another."""

    raw_text: str
    steps: tuple[str, ...]
    info_count: int
    assumption_count: int
    warnings: tuple[str, ...] = ()
    transcript: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.steps:
            raise ValidationError("an explanation needs at least one step")
        if self.info_count != self.raw_text.count(INFO_MARKER):
            raise ValidationError("info_count does not match [[INFO]] markers in raw text")
        if self.assumption_count != self.raw_text.count(ASSUMPTION_MARKER):
            raise ValidationError(
                "assumption_count does not match [[ASSUMPTION]] markers in raw text"
            )

    @property
    def step_count(self) -> int:
        return len(self.steps)


class Scheme(str, Enum):
    """Partial-mark scoring schemes."""

    CIA = "cia"
    C = "c"
    IA = "ia"
    LLM_SCORE_FROM_EXPLANATION = "inference_llm_score"
    LLM_SCORE_DIRECT = "llm_score"
    TOKEN_F1 = "token_f1"

    @property
    def needs_explanation(self) -> bool:
        return self in EXPLANATION_SCHEMES

    @property
    def higher_is_better(self) -> bool:
        # the explanation-based 1-5 rating measures difficulty: 1 = very easy
        return self is not Scheme.LLM_SCORE_FROM_EXPLANATION


HEURISTIC_SCHEMES = (Scheme.CIA, Scheme.C, Scheme.IA)
EXPLANATION_SCHEMES = HEURISTIC_SCHEMES + (Scheme.LLM_SCORE_FROM_EXPLANATION,)


@dataclass(frozen=True)
class PartialScore:
    scheme: Scheme
    value: float
    transcripts: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.scheme in (Scheme.LLM_SCORE_FROM_EXPLANATION, Scheme.LLM_SCORE_DIRECT):
            if self.value not in (1, 2, 3, 4, 5):
                raise ValidationError(f"{self.scheme.value} must be an integer in 1..5")
        elif self.scheme is Scheme.TOKEN_F1:
            if not 0.0 <= self.value <= 1.0:
                raise ValidationError("token_f1 must lie in [0, 1]")
        elif self.value > 0:
            raise ValidationError(f"{self.scheme.value} penalty score must be <= 0")

    @property
    def oriented(self) -> float:
        """Value flipped where needed so that larger always means a better answer."""
        return self.value if self.scheme.higher_is_better else -self.value


DEFAULT_ENDPOINT = "https://api.openai.com/v1/chat/completions"
API_KEY_ENV = "ENTAIL_EVAL_API_KEY"


@dataclass(frozen=True)
class BackendConfig:
    backend_id: str = "openai"
    model_name: str = "gpt-3.5-turbo-1106"
    seed: int = 42
    temperature: float = 0.0
    max_tokens: int = 300
    endpoint: str = DEFAULT_ENDPOINT
    api_key_env: str = API_KEY_ENV
    timeout: float = 60.0

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValidationError("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise ValidationError("max_tokens must be > 0")
        if self.timeout <= 0:
            raise ValidationError("timeout must be > 0")

    def with_seed(self, seed: int) -> "BackendConfig":
        return replace(self, seed=seed)


@dataclass(frozen=True)
class EvalRecord:
    """Everything computed for one successfully classified item."""

    item: EvalItem
    gold_statements: tuple[Statement, ...]
    system_statement: Statement
    entailment: tuple[DirectionalEntailment, ...]
    rank: HierarchyRank
    judgments: tuple[Judgment, ...]
    partial_scores: tuple[PartialScore, ...] = ()
    explanation: Optional[InferenceExplanation] = None
    partial_failures: tuple[str, ...] = ()
    provenance: tuple[str, ...] = field(default=())

    def judgment(self, policy: JudgePolicy) -> Optional[Judgment]:
        for j in self.judgments:
            if j.policy is policy:
                return j
        return None

    def score(self, scheme: Scheme) -> Optional[PartialScore]:
        for s in self.partial_scores:
            if s.scheme is scheme:
                return s
        return None


@dataclass(frozen=True)
class ItemFailure:
    """An item that could not be placed in the hierarchy."""

    item: EvalItem
    stage: str
    error: str
