"""Lexical-match and token-F1 baselines with SQuAD-style answer normalization."""

from __future__ import annotations

import re
from collections import Counter
from typing import Sequence

from entail_eval.stats.text import strip_punctuation

_ARTICLES = re.compile(r"\b(a|an|the)\b")


def normalize_tokens(text: str) -> list[str]:
    """Lowercase, drop punctuation and the articles a/an/the, split on whitespace."""
    return _ARTICLES.sub(" ", strip_punctuation(text.lower())).split()


def _contains(haystack: list[str], needle: list[str]) -> bool:
    n = len(needle)
    return any(haystack[i : i + n] == needle for i in range(len(haystack) - n + 1))


def lexical_match(system_answer: str, gold_answers: Sequence[str]) -> bool:
    """True if some normalized gold answer occurs as a contiguous run of system tokens."""
    system = normalize_tokens(system_answer)
    for gold in gold_answers:
        tokens = normalize_tokens(gold)
        if tokens and _contains(system, tokens):
            return True
    return False


def _f1(pred: list[str], gold: list[str]) -> float:
    if not pred or not gold:
        return 1.0 if pred == gold else 0.0
    common = sum((Counter(pred) & Counter(gold)).values())
    if common == 0:
        return 0.0
    precision = common / len(pred)
    recall = common / len(gold)
    return 2 * precision * recall / (precision + recall)


def token_f1(system_answer: str, gold_answers: Sequence[str]) -> float:
    """Best token-overlap F1 of the system answer against any gold answer."""
    pred = normalize_tokens(system_answer)
    return max(_f1(pred, normalize_tokens(g)) for g in gold_answers)
