"""Pareto dominance primitives for minimization problems."""

from __future__ import annotations

from typing import Sequence

import numpy as np


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """True iff ``a`` is no worse than ``b`` everywhere and differs somewhere."""
    le = all(x <= y for x, y in zip(a, b))
    return le and any(x < y for x, y in zip(a, b))


def domination_matrix(points) -> np.ndarray:
    """``D[i, j]`` is True when point i dominates point j."""
    f = np.asarray(points, dtype=float)
    if f.size == 0:
        return np.zeros((0, 0), dtype=bool)
    # column-wise comparisons avoid building an (n, n, m) temporary
    le = np.ones((len(f), len(f)), dtype=bool)
    lt = np.zeros((len(f), len(f)), dtype=bool)
    for col in f.T:
        le &= col[:, None] <= col[None, :]
        lt |= col[:, None] < col[None, :]
    return le & lt


def non_dominated_sort(points) -> list[list[int]]:
    """Partition point indices into successive non-dominated fronts."""
    f = np.asarray(points, dtype=float)
    n = len(f)
    if n == 0:
        raise ValueError("non_dominated_sort needs at least one point")
    dom = domination_matrix(f)
    counts = dom.sum(axis=0)
    fronts: list[list[int]] = []
    current = np.flatnonzero(counts == 0)
    while current.size:
        fronts.append(current.tolist())
        counts = counts - dom[current].sum(axis=0)
        counts[current] = -1
        current = np.flatnonzero(counts == 0)
    return fronts


def front_ranks(points) -> np.ndarray:
    ranks = np.empty(len(points), dtype=int)
    for r, front in enumerate(non_dominated_sort(points)):
        ranks[front] = r
    return ranks


def non_dominated_mask(points) -> np.ndarray:
    f = np.asarray(points, dtype=float)
    if len(f) == 0:
        return np.zeros(0, dtype=bool)
    return ~domination_matrix(f).any(axis=0)


def crowding_distance(points) -> np.ndarray:
    """Crowding distance of each point of one front (boundaries get +inf)."""
    f = np.asarray(points, dtype=float)
    n, m = f.shape if f.ndim == 2 else (len(f), 0)
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for j in range(m):
        order = np.lexsort((np.arange(n), f[:, j]))
        col = f[order, j]
        span = col[-1] - col[0]
        dist[order[0]] = dist[order[-1]] = np.inf
        if span <= 0:
            continue
        dist[order[1:-1]] += (col[2:] - col[:-2]) / span
    return dist


def unique_rows(points, decimals: int = 9) -> list[int]:
    """Indices of the first occurrence of each point after rounding."""
    pts = np.round(np.asarray(points, dtype=float), decimals)
    if len(pts) == 0:
        return []
    _, first = np.unique(pts, axis=0, return_index=True)
    return sorted(first.tolist())
