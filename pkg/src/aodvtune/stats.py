"""Nonparametric validation statistics.

Normality is screened with the Kolmogorov-Smirnov statistic against a normal
fitted from the sample (Lilliefors variant, since mean and spread are
estimated); distributions are then compared with the rank-based
Kruskal-Wallis test at 95% confidence. Small groups can use the exact
permutation null instead of the chi-square approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from scipy.special import gammaincc

__all__ = [
    "SampleSet",
    "TestResult",
    "DegenerateSampleError",
    "normal_cdf",
    "chi2_survival",
    "ks_normality",
    "lilliefors_pvalue",
    "kruskal_wallis",
]

ALPHA = 0.05


class DegenerateSampleError(ValueError):
    """The sample has no spread, so the test statistic is undefined."""


@dataclass(frozen=True)
class SampleSet:
    label: str
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) < 3:
            raise ValueError(f"{self.label}: need at least 3 values")


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    reject_at_95: bool


def _result(statistic: float, p_value: float) -> TestResult:
    p_value = min(1.0, max(0.0, p_value))
    return TestResult(statistic=statistic, p_value=p_value,
                      reject_at_95=p_value < ALPHA)


def normal_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def chi2_survival(x: float, df: int) -> float:
    """P(X >= x) for a chi-square variable with df degrees of freedom."""
    if df < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if x <= 0:
        return 1.0
    return float(gammaincc(df / 2.0, x / 2.0))


# -- normality ----------------------------------------------------------------

def ks_normality(s: SampleSet) -> TestResult:
    """Kolmogorov-Smirnov distance to a normal fitted by sample mean/sd,
    with the Lilliefors p-value (parameters estimated from the data)."""
    n = len(s.values)
    if n < 5:
        raise ValueError(f"{s.label}: normality test needs n >= 5")
    mean = math.fsum(s.values) / n
    var = math.fsum((v - mean) ** 2 for v in s.values) / (n - 1)
    if var == 0:
        raise DegenerateSampleError(f"{s.label}: sample has zero variance")
    sd = math.sqrt(var)
    xs = sorted(s.values)
    d = 0.0
    for i, x in enumerate(xs):
        cdf = normal_cdf((x - mean) / sd)
        d = max(d, (i + 1) / n - cdf, cdf - i / n)
    return _result(d, lilliefors_pvalue(d, n))


def lilliefors_pvalue(d: float, n: int) -> float:
    """Approximate p-value for the Lilliefors statistic.

    Dallal-Wilkinson (1986) exponential fit in the small-p region, switching
    to Stephens' (1974) polynomial fit of the modified statistic when the
    first estimate exceeds 0.1 (where the Dallal-Wilkinson form is unreliable).
    """
    if d <= 0:
        return 1.0
    if n > 100:
        kd = d * (n / 100.0) ** 0.49
        nd = 100.0
    else:
        kd = d
        nd = float(n)
    p = math.exp(-7.01256 * kd * kd * (nd + 2.78019)
                 + 2.99587 * kd * math.sqrt(nd + 2.78019)
                 - 0.122119 + 0.974598 / math.sqrt(nd) + 1.67997 / nd)
    if p <= 0.1:
        return p
    kk = (math.sqrt(n) - 0.01 + 0.85 / math.sqrt(n)) * d
    if kk <= 0.302:
        return 1.0
    if kk <= 0.5:
        return (2.76773 - 19.828315 * kk + 80.709644 * kk ** 2
                - 138.55152 * kk ** 3 + 81.541484 * kk ** 4)
    if kk <= 0.9:
        return (-4.901232 + 40.662806 * kk - 97.490286 * kk ** 2
                + 94.029866 * kk ** 3 - 32.355711 * kk ** 4)
    if kk <= 1.31:
        return (6.198765 - 19.558097 * kk + 23.186922 * kk ** 2
                - 12.234627 * kk ** 3 + 2.423045 * kk ** 4)
    return 0.0


# -- rank comparison ------------------------------------------------------------

def _midranks(pooled: Sequence[float]) -> tuple[list[float], float]:
    """Ranks with ties sharing their mid-rank, plus the tie-correction term
    sum(t^3 - t) over tie groups."""
    order = sorted(range(len(pooled)), key=lambda i: pooled[i])
    ranks = [0.0] * len(pooled)
    tie_term = 0.0
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and pooled[order[j + 1]] == pooled[order[i]]:
            j += 1
        mid = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mid
        t = j - i + 1
        tie_term += t ** 3 - t
        i = j + 1
    return ranks, tie_term


def _h_statistic(rank_sums: Sequence[float], sizes: Sequence[int], n: int,
                 tie_term: float) -> float:
    h = 12.0 / (n * (n + 1)) * math.fsum(
        rs * rs / sz for rs, sz in zip(rank_sums, sizes)) - 3.0 * (n + 1)
    correction = 1.0 - tie_term / (n ** 3 - n)
    return h / correction


def kruskal_wallis(groups: Sequence[SampleSet], method: str = "auto") -> TestResult:
    """Rank test for k >= 2 groups coming from one distribution.

    ``method``: "chi2" uses the chi-square approximation with k-1 degrees of
    freedom; "exact" enumerates the permutation null (feasible for small
    groups only); "auto" picks exact when any group has fewer than 5 values
    and the enumeration stays small.
    """
    if len(groups) < 2:
        raise ValueError("need at least 2 groups")
    sizes = [len(g.values) for g in groups]
    pooled = [v for g in groups for v in g.values]
    n = len(pooled)
    if all(v == pooled[0] for v in pooled):
        return TestResult(statistic=0.0, p_value=1.0, reject_at_95=False)
    ranks, tie_term = _midranks(pooled)

    bounds = []
    start = 0
    for sz in sizes:
        bounds.append((start, start + sz))
        start += sz
    rank_sums = [math.fsum(ranks[a:b]) for a, b in bounds]
    h = _h_statistic(rank_sums, sizes, n, tie_term)

    if method not in ("auto", "chi2", "exact"):
        raise ValueError(f"unknown method {method!r}")
    exact = method == "exact"
    if method == "auto" and min(sizes) < 5 and _n_partitions(sizes) <= 200_000:
        exact = True
    if exact:
        return _result(h, _exact_pvalue(ranks, sizes, n, tie_term, h))
    return _result(h, chi2_survival(h, len(groups) - 1))


def _n_partitions(sizes: Sequence[int]) -> int:
    total = sum(sizes)
    count = 1
    left = total
    for sz in sizes[:-1]:
        count *= math.comb(left, sz)
        left -= sz
    return count


def _exact_pvalue(ranks, sizes, n, tie_term, h_obs) -> float:
    """Exact permutation null: fraction of group assignments with H >= H_obs."""
    hits = 0
    total = 0
    eps = 1e-12

    def assign(remaining: tuple[int, ...], level: int, rank_sums: list[float]):
        nonlocal hits, total
        if level == len(sizes) - 1:
            rank_sums.append(math.fsum(ranks[i] for i in remaining))
            h = _h_statistic(rank_sums, sizes, n, tie_term)
            total += 1
            if h >= h_obs - eps:
                hits += 1
            rank_sums.pop()
            return
        for chosen in combinations(remaining, sizes[level]):
            chosen_set = set(chosen)
            rank_sums.append(math.fsum(ranks[i] for i in chosen))
            assign(tuple(i for i in remaining if i not in chosen_set),
                   level + 1, rank_sums)
            rank_sums.pop()

    assign(tuple(range(n)), 0, [])
    return hits / total
