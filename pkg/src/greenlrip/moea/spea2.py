"""SPEA-II: strength fitness with k-th nearest neighbour density and a truncated archive."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.spatial.distance import cdist

from ..instance import Instance
from ..metrics import Front
from ..pareto import domination_matrix, unique_rows
from .config import AlgorithmConfig
from .core import (GenerationInfo, Problem, binary_tournament, feasible_mask, final_front,
                   offspring_budget, random_keys, variation)


def _normalized(objectives: np.ndarray) -> np.ndarray:
    lo = objectives.min(axis=0)
    span = objectives.max(axis=0) - lo
    return (objectives - lo) / np.where(span > 0, span, 1.0)


def _pairwise(points: np.ndarray) -> np.ndarray:
    return cdist(points, points)


def strength_fitness(objectives: np.ndarray, k: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Raw fitness (sum of dominators' strengths) and density ``1 / (sigma_k + 2)``."""
    n = len(objectives)
    dom = domination_matrix(objectives)
    strength = dom.sum(axis=1)
    raw = (dom * strength[:, None]).sum(axis=0).astype(float)
    if k is None:
        k = int(math.isqrt(n))
    kth = min(k, n - 1)
    # column 0 of each sorted row is the point itself
    sigma = np.partition(_pairwise(_normalized(objectives)), kth, axis=1)[:, kth]
    return raw, 1.0 / (sigma + 2.0)


def truncate(objectives: np.ndarray, size: int) -> np.ndarray:
    """Nearest-neighbour truncation down to ``size`` points; both extremes are kept.

    Repeatedly drops the point whose sorted distance list to the others is
    lexicographically smallest.
    """
    idx = np.arange(len(objectives))
    if len(idx) <= size:
        return idx
    norm = _normalized(objectives)
    dist = _pairwise(norm)
    np.fill_diagonal(dist, np.inf)
    protected = {int(np.lexsort((objectives[:, 1], objectives[:, 0]))[0]),
                 int(np.lexsort((objectives[:, 0], objectives[:, 1]))[0])}
    alive = list(idx)
    while len(alive) > size:
        sub = np.sort(dist[np.ix_(alive, alive)], axis=1)
        cand = [j for j, a in enumerate(alive) if a not in protected] or list(range(len(alive)))
        rows = sub[cand]
        worst = cand[np.lexsort(rows.T[::-1])[0]]
        alive.pop(worst)
    return np.asarray(alive, dtype=int)


def environmental_selection(objectives: np.ndarray, fitness: np.ndarray, size: int) -> np.ndarray:
    """Next archive: the distinct non-dominated points, filled by fitness or truncated to ``size``.

    Clones (objectives equal to an earlier member) are only used to fill
    the archive after every distinct point has been taken.
    """
    distinct = np.zeros(len(fitness), dtype=bool)
    distinct[unique_rows(objectives)] = True
    nd = np.flatnonzero((fitness < 1.0) & distinct)
    if len(nd) > size:
        return nd[truncate(objectives[nd], size)]
    if len(nd) < size:
        rest = np.setdiff1d(np.arange(len(fitness)), nd)
        order = rest[np.lexsort((rest, fitness[rest], ~distinct[rest]))]
        nd = np.concatenate([nd, order[: size - len(nd)]])
    return nd


def run_spea2(instance: Instance, config: AlgorithmConfig,
              on_generation: Callable[[GenerationInfo], None] | None = None) -> Front:
    rng = np.random.default_rng(config.seed)
    problem = Problem.from_config(instance, config)
    n, n_bar = config.population_size, config.archive_size
    k = int(math.isqrt(n + n_bar))

    keys = random_keys(rng, (n, problem.length))
    objs, plans = problem.evaluate(keys)
    a_keys, a_objs, a_plans = keys[:0], objs[:0], []
    gen = 0
    while True:
        u_keys = np.vstack([keys, a_keys])
        u_objs = np.vstack([objs, a_objs])
        u_plans = plans + a_plans
        raw, density = strength_fitness(u_objs, k)
        fit = raw + density
        keep = environmental_selection(u_objs, fit, n_bar)
        a_keys, a_objs = u_keys[keep], u_objs[keep]
        a_plans = [u_plans[i] for i in keep]
        a_fit = fit[keep]
        if on_generation:
            on_generation(GenerationInfo(gen, problem.evaluations, a_objs, feasible_mask(a_plans)))
        if problem.evaluations >= config.fe_budget:
            break
        n_cross, n_mut = offspring_budget(config, problem.evaluations)
        if n_cross + n_mut == 0:
            break
        picks = binary_tournament(lambda a, b: a_fit[a] <= a_fit[b], len(a_fit), n_cross + n_mut, rng)
        keys = variation(a_keys[picks], config, rng, n_cross, n_mut)
        objs, plans = problem.evaluate(keys)
        gen += 1

    return final_front(a_objs, a_plans, config)
