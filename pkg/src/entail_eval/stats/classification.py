"""Agreement between binary or categorical label sequences."""

from __future__ import annotations

from collections import Counter
from typing import Hashable, Sequence

from entail_eval.errors import AlignmentError


def _check_lengths(a: Sequence, b: Sequence) -> None:
    if len(a) != len(b):
        raise AlignmentError(f"length mismatch: {len(a)} vs {len(b)}")
    if not a:
        raise ValueError("need at least one label")


def binary_f1_accuracy(predicted: Sequence[bool], human: Sequence[bool]) -> tuple[float, float]:
    """F1 of the positive ("correct answer") class and overall accuracy.

    F1 is 0.0 when there are no true positives.
    """
    _check_lengths(predicted, human)
    tp = fp = fn = tn = 0
    for p, h in zip(predicted, human):
        p, h = bool(p), bool(h)
        if p and h:
            tp += 1
        elif p:
            fp += 1
        elif h:
            fn += 1
        else:
            tn += 1
    accuracy = (tp + tn) / len(predicted)
    f1 = 2 * tp / (2 * tp + fp + fn) if tp else 0.0
    return f1, accuracy


def cohen_kappa(labels_a: Sequence[Hashable], labels_b: Sequence[Hashable]) -> float:
    """Cohen's kappa for two raters over a shared finite label set.

    When chance agreement is 1 (both raters constant on the same label) the
    textbook formula is 0/0; this returns 1.0 for perfect observed agreement
    and 0.0 otherwise.
    """
    _check_lengths(labels_a, labels_b)
    n = len(labels_a)
    observed = sum(x == y for x, y in zip(labels_a, labels_b)) / n
    count_a, count_b = Counter(labels_a), Counter(labels_b)
    expected = sum(count_a[k] * count_b[k] for k in count_a) / (n * n)
    if expected >= 1.0:
        return 1.0 if observed == 1.0 else 0.0
    return (observed - expected) / (1.0 - expected)
