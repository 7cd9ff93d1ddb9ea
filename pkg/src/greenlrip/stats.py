"""Kruskal-Wallis omnibus test and Dunn pairwise comparisons with Bonferroni adjustment."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import erfc, gammaincc
from scipy.stats import rankdata

DEFAULT_ALPHA = 0.05


class StatsError(ValueError):
    pass


def chi_square_sf(x: float, df: int) -> float:
    """Upper-tail probability of a chi-square variable (regularized upper incomplete gamma)."""
    if df < 1:
        raise StatsError("df must be >= 1")
    if x < 0:
        raise StatsError("x must be >= 0")
    return float(gammaincc(df / 2.0, x / 2.0))


def normal_two_sided(z: float) -> float:
    return float(erfc(abs(z) / math.sqrt(2.0)))


def _groups(groups) -> tuple[list[str], list[np.ndarray]]:
    if isinstance(groups, Mapping):
        names, data = list(groups), list(groups.values())
    else:
        data = list(groups)
        names = [str(j + 1) for j in range(len(data))]
    arrs = [np.asarray(g, dtype=float).ravel() for g in data]
    if len(arrs) < 2:
        raise StatsError("need at least 2 groups")
    if any(len(a) == 0 for a in arrs):
        raise StatsError("every group needs at least one observation")
    if any(np.isnan(a).any() for a in arrs):
        raise StatsError("observations must not be NaN")
    return names, arrs


@dataclass(frozen=True)
class _Ranked:
    names: list[str]
    sizes: np.ndarray
    mean_ranks: np.ndarray
    n: int
    tie_sum: float  # sum of t^3 - t over tie groups


def _rank(groups) -> _Ranked:
    names, arrs = _groups(groups)
    pooled = np.concatenate(arrs)
    ranks = rankdata(pooled)
    _, counts = np.unique(pooled, return_counts=True)
    bounds = np.cumsum([0] + [len(a) for a in arrs])
    means = np.array([ranks[bounds[j]:bounds[j + 1]].mean() for j in range(len(arrs))])
    return _Ranked(names, np.diff(bounds), means, len(pooled), float(np.sum(counts ** 3 - counts)))


@dataclass(frozen=True)
class KruskalResult:
    h: float
    df: int
    p_value: float


def kruskal_wallis(groups) -> KruskalResult:
    """H with mid-ranks and tie correction; p from chi-square with groups - 1 df."""
    r = _rank(groups)
    n = r.n
    if n < 3:
        raise StatsError("need at least 3 observations in total")
    df = len(r.sizes) - 1
    tie_factor = 1.0 - r.tie_sum / (n ** 3 - n)
    if tie_factor <= 0:
        return KruskalResult(0.0, df, 1.0)
    rank_sums = r.mean_ranks * r.sizes
    h = (12.0 / (n * (n + 1)) * float(np.sum(rank_sums ** 2 / r.sizes)) - 3.0 * (n + 1)) / tie_factor
    h = max(h, 0.0)
    return KruskalResult(h, df, chi_square_sf(h, df))


@dataclass(frozen=True)
class PairwiseRow:
    sample1: str
    sample2: str
    statistic: float  # mean-rank difference
    std_error: float
    z: float
    p_value: float
    adjusted_p: float
    significant: bool

    HEADER = ("Sample1-Sample2", "Test Statistic", "Std. Error", "Std. Test Statistic", "Sig.", "Adj. Sig.",
              "Significant")

    def as_row(self) -> list:
        return [f"{self.sample1}-{self.sample2}", self.statistic, self.std_error, self.z, self.p_value,
                self.adjusted_p, self.significant]


def pairwise_dunn(groups, alpha: float = DEFAULT_ALPHA) -> list[PairwiseRow]:
    """Dunn's test on pooled mid-ranks, tie-corrected, Bonferroni over all pairs."""
    if not 0 < alpha < 1:
        raise StatsError("alpha must lie in (0, 1)")
    r = _rank(groups)
    n = r.n
    pairs = list(itertools.combinations(range(len(r.sizes)), 2))
    var = n * (n + 1) / 12.0 - (r.tie_sum / (12.0 * (n - 1)) if n > 1 else 0.0)
    rows = []
    for a, b in pairs:
        diff = float(r.mean_ranks[a] - r.mean_ranks[b])
        se = math.sqrt(max(var, 0.0) * (1.0 / r.sizes[a] + 1.0 / r.sizes[b]))
        if se == 0:
            z, p = 0.0, 1.0
        else:
            z = diff / se
            p = normal_two_sided(z)
        adj = min(1.0, p * len(pairs))
        rows.append(PairwiseRow(r.names[a], r.names[b], diff, se, z, p, adj, adj < alpha))
    return rows


def compare_groups(groups, alpha: float = DEFAULT_ALPHA) -> tuple[KruskalResult, list[PairwiseRow]]:
    """Omnibus test first, then the pairwise table."""
    return kruskal_wallis(groups), pairwise_dunn(groups, alpha)


def group_by(rows: Sequence[Mapping[str, str]], key: str, value: str) -> dict[str, list[float]]:
    """Collect ``value`` per distinct ``key`` from CSV-like rows, skipping blanks."""
    out: dict[str, list[float]] = {}
    for row in rows:
        v = row.get(value, "")
        if v in ("", None, "nan", "None"):
            continue
        out.setdefault(row[key], []).append(float(v))
    return out
