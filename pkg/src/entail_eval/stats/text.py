"""Corpus BLEU and ROUGE-1/2/L over a simple lowercase, punctuation-free tokenization."""

from __future__ import annotations

import math
import unicodedata
from collections import Counter
from typing import Sequence

from entail_eval.errors import AlignmentError

MAX_ORDER = 4


def strip_punctuation(text: str) -> str:
    return "".join(ch for ch in text if not unicodedata.category(ch).startswith("P"))


def tokenize(text: str) -> list[str]:
    return strip_punctuation(text.lower()).split()


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(candidates: Sequence[str], references: Sequence[str]) -> float:
    """Corpus-level BLEU (0-100) with one reference per candidate.

    Clipped n-gram precisions for n = 1..4 are pooled over the corpus and
    combined by an unweighted geometric mean, times the brevity penalty.
    For n >= 2 a zero match count is replaced by 1 (add-one on the
    numerator), since short statements rarely share 4-grams; a zero
    unigram precision still yields 0.
    """
    if len(candidates) != len(references):
        raise AlignmentError(
            f"{len(candidates)} candidates vs {len(references)} references"
        )
    if not candidates:
        raise ValueError("corpus_bleu needs a non-empty corpus")

    matches = [0] * MAX_ORDER
    totals = [0] * MAX_ORDER
    cand_len = ref_len = 0
    for cand, ref in zip(candidates, references):
        c_toks, r_toks = tokenize(cand), tokenize(ref)
        cand_len += len(c_toks)
        ref_len += len(r_toks)
        for n in range(1, MAX_ORDER + 1):
            c_grams, r_grams = ngrams(c_toks, n), ngrams(r_toks, n)
            matches[n - 1] += sum(min(cnt, r_grams[g]) for g, cnt in c_grams.items())
            totals[n - 1] += sum(c_grams.values())

    if cand_len == 0 or matches[0] == 0:
        return 0.0

    log_sum = 0.0
    for n in range(1, MAX_ORDER + 1):
        m, t = matches[n - 1], totals[n - 1]
        if n >= 2 and m == 0:
            m, t = 1, max(t, 1)
        log_sum += math.log(m / t)
    brevity = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / cand_len)
    return 100.0 * brevity * math.exp(log_sum / MAX_ORDER)


def _prf(overlap: int, cand_total: int, ref_total: int) -> tuple[float, float, float]:
    if overlap == 0:
        return 0.0, 0.0, 0.0
    p = overlap / cand_total
    r = overlap / ref_total
    return p, r, 2 * p * r / (p + r)


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge(candidate: str, reference: str, variant: str = "rl") -> tuple[float, float, float]:
    """Return (precision, recall, f1) for ROUGE-1, ROUGE-2 or ROUGE-L.

    ``variant`` is one of ``"r1"``, ``"r2"``, ``"rl"`` (case-insensitive).
    If neither side has a bigram (single-token texts), ROUGE-2 falls back to
    exact token equality.
    """
    variant = variant.lower()
    c_toks, r_toks = tokenize(candidate), tokenize(reference)
    if not c_toks or not r_toks:
        raise ValueError("rouge needs non-empty candidate and reference")
    if variant == "rl":
        return _prf(lcs_length(c_toks, r_toks), len(c_toks), len(r_toks))
    if variant in ("r1", "r2"):
        n = 1 if variant == "r1" else 2
        c_grams, r_grams = ngrams(c_toks, n), ngrams(r_toks, n)
        c_total, r_total = sum(c_grams.values()), sum(r_grams.values())
        if c_total == 0 and r_total == 0:
            return (1.0, 1.0, 1.0) if c_toks == r_toks else (0.0, 0.0, 0.0)
        overlap = sum((c_grams & r_grams).values())
        return _prf(overlap, c_total, r_total)
    raise ValueError(f"unknown ROUGE variant {variant!r}")
