"""Summary statistics over grade records: coefficient of variation for the
complexity ladder, Spearman rank correlation between complexity and score,
and a two-sided Welch t-test for framework comparisons."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps


class StatsError(Exception):
    pass


@dataclass
class RobustnessReport:
    completions: list[float]
    mean: float
    sd: float
    cv: float | None  # None when the mean is zero (flagged undefined)

    @property
    def defined(self) -> bool:
        return self.cv is not None


def robustness_cv(completions: list[float]) -> RobustnessReport:
    """CV = population standard deviation / mean of the per-task completion
    percentages for one (model, prompt style) pair."""
    if not completions:
        raise StatsError("robustness_cv needs at least one completion value")
    arr = np.asarray(completions, dtype=float)
    mean = float(arr.mean())
    sd = float(arr.std(ddof=0))
    cv = None if mean == 0 else sd / mean
    return RobustnessReport(list(map(float, arr)), mean, sd, cv)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties given the average of their positions."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=float)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def spearman_complexity_correlation(
    complexities: list[float], scores: list[float]
) -> tuple[float, float]:
    """(rho, two-sided p) with average-rank ties; p from the t-approximation
    t = rho * sqrt((n - 2) / (1 - rho^2)).

    Raises on constant input, where the correlation is undefined.
    """
    if len(complexities) != len(scores):
        raise StatsError("complexities and scores must be the same length")
    n = len(scores)
    if len(set(complexities)) < 3:
        raise StatsError("need at least 3 distinct complexities")
    x = np.asarray(complexities, dtype=float)
    y = np.asarray(scores, dtype=float)
    if np.all(y == y[0]):
        raise StatsError("scores are constant; correlation undefined")
    rx = _average_ranks(x)
    ry = _average_ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    rho = float(np.dot(rx, ry) / np.sqrt(np.dot(rx, rx) * np.dot(ry, ry)))
    if abs(rho) >= 1.0:
        return (float(np.sign(rho)), 0.0)
    t = rho * np.sqrt((n - 2) / (1.0 - rho * rho))
    p = float(2.0 * sps.t.sf(abs(t), df=n - 2))
    return rho, p


def welch_t_test(a: list[float], b: list[float]) -> tuple[float, float]:
    """Welch statistic with Welch-Satterthwaite degrees of freedom and a
    two-sided p from the t survival function.

    Degenerate case (both groups zero variance, equal means) returns
    (0.0, 1.0) by convention.
    """
    xa = np.asarray(a, dtype=float)
    xb = np.asarray(b, dtype=float)
    if len(xa) < 2 or len(xb) < 2:
        raise StatsError("each group needs at least 2 values")
    va = xa.var(ddof=1)
    vb = xb.var(ddof=1)
    if va == 0 and vb == 0:
        if xa.mean() == xb.mean():
            return (0.0, 1.0)
        raise StatsError("zero variance in both groups with unequal means")
    se2 = va / len(xa) + vb / len(xb)
    t = float((xa.mean() - xb.mean()) / np.sqrt(se2))
    df = se2**2 / (
        (va / len(xa)) ** 2 / (len(xa) - 1) + (vb / len(xb)) ** 2 / (len(xb) - 1)
    )
    p = float(2.0 * sps.t.sf(abs(t), df=df))
    return t, p
