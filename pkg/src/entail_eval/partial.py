"""Partial marks from inference explanations and direct 1-5 ratings."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from entail_eval import prompts
from entail_eval.errors import NoStepsFound, ScoreParseFailure
from entail_eval.gateway import ChatRequest, Gateway
from entail_eval.model import (
    ASSUMPTION_MARKER,
    INFO_MARKER,
    BackendConfig,
    EvalItem,
    InferenceExplanation,
    PartialScore,
    Scheme,
    Statement,
)

_STEP = re.compile(r"^\s*(\d+)[.)]\s*(.*)$")
_INTEGER = re.compile(r"[-+]?\d+(?:\.\d+)?")


@dataclass(frozen=True)
class SchemeWeights:
    """Penalty per step, per [[INFO]] and per [[ASSUMPTION]]."""

    step: float = 10
    info: float = 3
    assumption: float = 5


DEFAULT_WEIGHTS = SchemeWeights()


def explain_request(s1: str, s2: str, config: BackendConfig) -> ChatRequest:
    return ChatRequest.single(prompts.fill(prompts.EXPLAIN, s1=s1, s2=s2), config)


def parse_explanation(raw: str, transcript: Optional[str] = None) -> InferenceExplanation:
    """Split a reply into numbered steps and count the markers in it.

    Every line starting with ``<n>.`` or ``<n>)`` is a step, including lines
    that only restate a premise. Markers are counted over the whole reply;
    markers found outside a step are still counted but produce a warning.
    """
    steps = []
    warnings = []
    for line in raw.splitlines():
        m = _STEP.match(line)
        if m:
            steps.append(m.group(2).strip())
        elif INFO_MARKER in line or ASSUMPTION_MARKER in line:
            warnings.append(f"marker outside a numbered step: {line.strip()!r}")
    if not steps:
        raise NoStepsFound("no numbered steps in explanation", raw)
    return InferenceExplanation(
        raw_text=raw,
        steps=tuple(steps),
        info_count=raw.count(INFO_MARKER),
        assumption_count=raw.count(ASSUMPTION_MARKER),
        warnings=tuple(warnings),
        transcript=transcript,
    )


def explain(
    gateway: Gateway, gold: Statement, system: Statement, config: BackendConfig
) -> InferenceExplanation:
    """Ask for the steps that lead from the gold statement (S1) to the system statement (S2)."""
    transcript = gateway.call(explain_request(gold.text, system.text, config))
    return parse_explanation(transcript.response_text, transcript.key)


def score_heuristic(
    expl: InferenceExplanation, scheme: Scheme, weights: SchemeWeights = DEFAULT_WEIGHTS
) -> PartialScore:
    step_penalty = expl.step_count * weights.step
    marker_penalty = expl.info_count * weights.info + expl.assumption_count * weights.assumption
    if scheme is Scheme.CIA:
        value = -step_penalty - marker_penalty
    elif scheme is Scheme.C:
        value = -step_penalty
    elif scheme is Scheme.IA:
        value = -marker_penalty
    else:
        raise ValueError(f"{scheme.value} is not a heuristic scheme")
    transcripts = (expl.transcript,) if expl.transcript else ()
    # +0.0 turns -0.0 into 0.0
    return PartialScore(scheme, value + 0.0, transcripts)


def parse_score(raw: str) -> int:
    """First number in the reply, which must be an integer from 1 to 5."""
    m = _INTEGER.search(raw)
    if m is None:
        raise ScoreParseFailure("no number in score response", raw)
    token = m.group(0)
    if not re.fullmatch(r"\+?[1-5]", token):
        raise ScoreParseFailure(f"score {token!r} is not an integer in 1..5", raw)
    return int(token)


def llm_score_from_explanation(
    gateway: Gateway,
    gold: Statement,
    system: Statement,
    expl: InferenceExplanation,
    config: BackendConfig,
) -> PartialScore:
    """Rate inference difficulty (1 = very easy) as a follow-up turn to :func:`explain`."""
    request = explain_request(gold.text, system.text, config).followup(
        expl.raw_text, prompts.RATE_EXPLANATION
    )
    transcript = gateway.call(request)
    keys = tuple(k for k in (expl.transcript, transcript.key) if k)
    return PartialScore(Scheme.LLM_SCORE_FROM_EXPLANATION, parse_score(transcript.response_text), keys)


def score_direct_request(item: EvalItem, config: BackendConfig) -> ChatRequest:
    prompt = prompts.fill(
        prompts.SCORE_DIRECT,
        question=item.question,
        golden_answer="/".join(item.gold_answers),
        system_answer=item.system_answer,
    )
    return ChatRequest.single(prompt, config)


def llm_score_direct(gateway: Gateway, item: EvalItem, config: BackendConfig) -> PartialScore:
    """Single-shot 1-5 correctness rating (5 = completely right)."""
    transcript = gateway.call(score_direct_request(item, config))
    return PartialScore(Scheme.LLM_SCORE_DIRECT, parse_score(transcript.response_text), (transcript.key,))
