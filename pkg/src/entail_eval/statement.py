"""Question-answer to declarative statement conversion (QA2D)."""

from __future__ import annotations

from itertools import combinations
from typing import Sequence, Union

from entail_eval import prompts
from entail_eval.errors import AlignmentError, EmptyResponse, ValidationError
from entail_eval.gateway import ChatRequest, Gateway
from entail_eval.model import BackendConfig, Source, Statement
from entail_eval.stats.text import corpus_bleu


def qa2d_request(question: str, answer: str, config: BackendConfig) -> ChatRequest:
    return ChatRequest.single(prompts.fill(prompts.QA2D, question=question, answer=answer), config)


def first_line(text: str) -> str:
    for line in text.splitlines():
        if line.strip():
            return line.strip()
    return ""


def to_statement(
    gateway: Gateway,
    question: str,
    answer: str,
    config: BackendConfig,
    *,
    source: Source = Source.GOLD,
    origin_item: str = "",
) -> Statement:
    """Rewrite ``(question, answer)`` as one declarative sentence.

    The backend reply is trimmed and cut to its first non-empty line.
    """
    if not question.strip() or not answer.strip():
        raise ValidationError("question and answer must be non-empty")
    transcript = gateway.call(qa2d_request(question, answer, config))
    text = first_line(transcript.response_text)
    if not text:
        raise EmptyResponse("QA2D returned an empty statement", transcript.response_text)
    return Statement(text=text, source=source, origin_item=origin_item, transcript=transcript.key)


def _text(s: Union[str, Statement]) -> str:
    return (s.text if isinstance(s, Statement) else s).strip()


def _origin(s: Union[str, Statement]):
    return s.origin_item if isinstance(s, Statement) else None


def statement_agreement(runs: Sequence[Sequence[Union[str, Statement]]]) -> tuple[float, float]:
    """Mean pairwise corpus BLEU and mean pairwise exact-match rate across runs.

    BLEU is not symmetric, so each pair of runs is scored in both directions
    and averaged. Exact match compares whitespace-trimmed strings.
    """
    if len(runs) < 2:
        raise ValueError("statement_agreement needs at least two runs")
    size = len(runs[0])
    if size == 0 or any(len(r) != size for r in runs):
        raise AlignmentError("runs must be non-empty and of equal length")
    origins = [_origin(s) for s in runs[0]]
    for run in runs[1:]:
        if any(o is not None and _origin(s) not in (None, o) for s, o in zip(run, origins)):
            raise AlignmentError("runs list statements for different items")

    texts = [[_text(s) for s in run] for run in runs]
    bleus, exact = [], []
    for a, b in combinations(texts, 2):
        bleus.append((corpus_bleu(a, b) + corpus_bleu(b, a)) / 2)
        exact.append(sum(x == y for x, y in zip(a, b)) / size)
    return sum(bleus) / len(bleus), sum(exact) / len(exact)
