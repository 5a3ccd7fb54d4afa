"""One-tailed Fisher's exact test and the Brunner-Munzel test."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats as sp_stats

from entail_eval.errors import DegenerateSample, ValidationError


@dataclass(frozen=True)
class Contingency2x2:
    """Table ``[[a, b], [c, d]]``.

    Rows are the two groups compared (row 1 is the group expected to do
    better); column 1 counts human-correct answers, column 2 the rest.
    """

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self) -> None:
        for name in "abcd":
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValidationError(f"cell {name} must be a non-negative integer, got {v}")
            object.__setattr__(self, name, int(v))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "Contingency2x2":
        (a, b), (c, d) = rows
        return cls(a, b, c, d)

    @property
    def total(self) -> int:
        return self.a + self.b + self.c + self.d

    def as_rows(self) -> list[list[int]]:
        return [[self.a, self.b], [self.c, self.d]]


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    estimate: Optional[float] = None
    df: Optional[float] = None

    __test__ = False  # not a pytest class


def _log_comb(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def odds_ratio(t: Contingency2x2) -> float:
    """Sample odds ratio ``a*d / (b*c)``; ``inf`` if only the denominator is 0, NaN if both are."""
    num, den = t.a * t.d, t.b * t.c
    if den == 0:
        return math.inf if num > 0 else math.nan
    return num / den


def fisher_exact_one_tailed(t: Contingency2x2) -> TestResult:
    """P(A >= a) under the hypergeometric null with all margins fixed.

    The alternative is that row 1 has the higher proportion in column 1.
    Terms are evaluated in log space.
    """
    n = t.total
    if n == 0:
        raise ValidationError("Fisher's exact test needs a non-empty table")
    row1 = t.a + t.b
    col1 = t.a + t.c
    lo = max(0, col1 - (n - row1))
    hi = min(row1, col1)
    log_denom = _log_comb(n, col1)
    logs = [
        _log_comb(row1, k) + _log_comb(n - row1, col1 - k) - log_denom
        for k in range(max(t.a, lo), hi + 1)
    ]
    top = max(logs)
    p = math.exp(top) * math.fsum(math.exp(x - top) for x in logs)
    return TestResult(statistic=odds_ratio(t), p_value=min(1.0, p))


def brunner_munzel_one_sided(x: Sequence[float], y: Sequence[float]) -> TestResult:
    """Brunner-Munzel test against the alternative that ``y`` tends to be larger.

    ``estimate`` is the relative effect P(X < Y) + P(X = Y)/2 and the p-value
    comes from a t distribution with Welch-Satterthwaite degrees of freedom.
    Complete separation of the samples has zero variance estimate; it is
    reported as an infinite statistic with p = 0 (or 1 in the wrong direction).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n1, n2 = x.size, y.size
    if n1 < 2 or n2 < 2:
        raise ValidationError("Brunner-Munzel needs at least two observations per group")

    combined = sp_stats.rankdata(np.concatenate([x, y]))
    rx, ry = combined[:n1], combined[n1:]
    mean_x, mean_y = rx.mean(), ry.mean()
    # placements: combined rank minus rank within own sample
    place_x = rx - sp_stats.rankdata(x)
    place_y = ry - sp_stats.rankdata(y)
    var_x = np.sum((place_x - mean_x + (n1 + 1) / 2) ** 2) / (n1 - 1)
    var_y = np.sum((place_y - mean_y + (n2 + 1) / 2) ** 2) / (n2 - 1)
    effect = float((mean_y - (n2 + 1) / 2) / n1)

    spread = n1 * var_x + n2 * var_y
    if spread == 0:
        if effect == 0.5:
            raise DegenerateSample("all observations tied within both samples")
        if effect > 0.5:
            return TestResult(statistic=math.inf, p_value=0.0, estimate=effect)
        return TestResult(statistic=-math.inf, p_value=1.0, estimate=effect)

    statistic = float(n1 * n2 * (mean_y - mean_x) / ((n1 + n2) * math.sqrt(spread)))
    df = spread**2 / ((n1 * var_x) ** 2 / (n1 - 1) + (n2 * var_y) ** 2 / (n2 - 1))
    p = float(sp_stats.t.sf(statistic, df))
    return TestResult(statistic=statistic, p_value=p, estimate=effect, df=float(df))
