"""Statistical helpers: Monte Carlo summaries, KS and two-sample chi-square tests."""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Callable, Hashable, Sequence

import numpy as np
from scipy import stats

__all__ = [
    "mc_mean",
    "mc_variance",
    "ks_one_sample",
    "ks_distance",
    "two_sample_chi2",
]


def mc_mean(values) -> tuple[float, float]:
    """Sample mean and its standard error, with compensated summation."""
    x = np.asarray(values, dtype=float).ravel()
    m = x.size
    if m == 0:
        raise ValueError("no values")
    mean = math.fsum(x) / m
    if m == 1:
        return mean, float("nan")
    var = math.fsum((x - mean) ** 2) / (m - 1)
    return mean, math.sqrt(var / m)


def mc_variance(values) -> tuple[float, float]:
    """Unbiased sample variance and a large-sample standard error for it."""
    x = np.asarray(values, dtype=float).ravel()
    m = x.size
    if m < 2:
        raise ValueError("need at least two values")
    mean = math.fsum(x) / m
    d = x - mean
    var = math.fsum(d**2) / (m - 1)
    m4 = math.fsum(d**4) / m
    se = math.sqrt(max(m4 - var**2 * (m - 3) / (m - 1), 0.0) / m)
    return var, se


def ks_one_sample(values, cdf: Callable) -> tuple[float, float]:
    """Kolmogorov-Smirnov statistic and p-value against a continuous CDF."""
    res = stats.kstest(np.asarray(values, dtype=float), cdf)
    return float(res.statistic), float(res.pvalue)


def ks_distance(values, cdf: Callable) -> float:
    """Sup distance between the empirical CDF of ``values`` and ``cdf``."""
    x = np.sort(np.asarray(values, dtype=float))
    m = x.size
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - f), np.max(f - (i - 1) / m)))


def two_sample_chi2(
    a: Sequence[Hashable], b: Sequence[Hashable], min_expected: float = 5.0
) -> tuple[float, float, int]:
    """Chi-square test that two samples of categories share one distribution.

    Categories whose expected count falls below ``min_expected`` in either
    arm are pooled into a single remainder bin.  Returns
    ``(statistic, p_value, dof)``.
    """
    ca, cb = Counter(a), Counter(b)
    na, nb = sum(ca.values()), sum(cb.values())
    if na == 0 or nb == 0:
        raise ValueError("both samples must be non-empty")
    cats = sorted(set(ca) | set(cb), key=lambda c: (-(ca[c] + cb[c]), repr(c)))
    small = min(na, nb) / (na + nb)
    rows_a, rows_b = [], []
    rest_a = rest_b = 0
    for c in cats:
        if (ca[c] + cb[c]) * small >= min_expected:
            rows_a.append(ca[c])
            rows_b.append(cb[c])
        else:
            rest_a += ca[c]
            rest_b += cb[c]
    if rest_a + rest_b > 0:
        rows_a.append(rest_a)
        rows_b.append(rest_b)
    if len(rows_a) < 2:
        return 0.0, 1.0, 0
    table = np.array([rows_a, rows_b])
    res = stats.chi2_contingency(table, correction=False)
    return float(res.statistic), float(res.pvalue), int(res.dof)
