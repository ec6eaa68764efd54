"""Two-sided t-tests over per-topic scores, with Bonferroni-corrected baseline comparison.

The t statistics are computed here; only the Student t tail probability
comes from :func:`scipy.special.stdtr`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from scipy.special import stdtr

from .metrics import MeasureId, ScoreTable

__all__ = ["unpaired_ttest", "paired_ttest", "SignificanceResult", "paired_ttest_bonferroni"]


def _moments(xs: Sequence[float]) -> tuple[float, float]:
    """Mean and unbiased variance; a constant sample gets exactly its value and 0."""
    if all(x == xs[0] for x in xs):
        return xs[0], 0.0
    mean = math.fsum(xs) / len(xs)
    return mean, math.fsum((x - mean) ** 2 for x in xs) / (len(xs) - 1)


def _two_sided(t: float, df: float) -> float:
    return float(min(1.0, 2.0 * stdtr(df, -abs(t))))


def unpaired_ttest(a: Sequence[float], b: Sequence[float], equal_var: bool = True) -> float:
    """Two-sided two-sample t-test p-value (Student by default, Welch with ``equal_var=False``).

    Two constant samples with the same value give p = 1; constant samples
    with different values have no defined p-value and raise ``ValueError``.
    """
    a = [float(x) for x in a]
    b = [float(x) for x in b]
    n1, n2 = len(a), len(b)
    if n1 < 2 or n2 < 2:
        raise ValueError(f"each sample needs at least 2 values (got {n1} and {n2})")
    (m1, v1), (m2, v2) = _moments(a), _moments(b)

    if equal_var:
        df = n1 + n2 - 2
        pooled = ((n1 - 1) * v1 + (n2 - 1) * v2) / df
        se2 = pooled * (1.0 / n1 + 1.0 / n2)
    else:
        se2 = v1 / n1 + v2 / n2
        if se2 > 0:
            df = se2**2 / ((v1 / n1) ** 2 / (n1 - 1) + (v2 / n2) ** 2 / (n2 - 1))
    if se2 == 0.0:
        if m1 == m2:
            return 1.0
        raise ValueError("both samples are constant with different values; p-value undefined")
    t = (m1 - m2) / math.sqrt(se2)
    return _two_sided(t, df)


def paired_ttest(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sided paired t-test p-value.

    If all differences are equal the statistic degenerates: p = 1 when they
    are all zero, p = 0 otherwise.
    """
    if len(a) != len(b):
        raise ValueError(f"paired samples differ in length ({len(a)} vs {len(b)})")
    n = len(a)
    if n < 2:
        raise ValueError("paired test needs at least 2 pairs")
    diffs = [float(x) - float(y) for x, y in zip(a, b)]
    m, v = _moments(diffs)
    if v == 0.0:
        return 1.0 if m == 0.0 else 0.0
    t = m / math.sqrt(v / n)
    return _two_sided(t, n - 1)


@dataclass(frozen=True)
class SignificanceResult:
    run_tag: str
    measure: MeasureId
    pvalue: float
    threshold: float
    significant: bool


def paired_ttest_bonferroni(
    system_tables: Sequence[ScoreTable],
    baseline: ScoreTable,
    measure: MeasureId,
    alpha: float = 0.05,
    family_size: int | None = None,
) -> list[SignificanceResult]:
    """Paired test of each system against ``baseline``, flagged at ``alpha / m``.

    ``m`` defaults to the number of systems tested.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    m = len(system_tables) if family_size is None else family_size
    if m < 1:
        raise ValueError("family size must be at least 1")
    topics = baseline.evaluated_topics
    base = [baseline.score(measure, t) for t in topics]
    threshold = alpha / m
    results = []
    for table in system_tables:
        if set(table.evaluated_topics) != set(topics):
            raise ValueError(
                f"topic sets of {table.run_tag!r} and baseline {baseline.run_tag!r} differ"
            )
        scores = [table.score(measure, t) for t in topics]
        p = paired_ttest(scores, base)
        results.append(SignificanceResult(table.run_tag, measure, p, threshold, p < threshold))
    return results
