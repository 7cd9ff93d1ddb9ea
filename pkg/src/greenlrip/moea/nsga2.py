"""NSGA-II and NRGA: elitist non-dominated sorting with crowding, differing only in parent selection."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..instance import Instance
from ..metrics import Front
from ..pareto import crowding_distance, non_dominated_sort, unique_rows
from .config import AlgorithmConfig
from .core import (GenerationInfo, Problem, binary_tournament, feasible_mask, final_front,
                   offspring_budget, random_keys, variation)

Callback = Callable[[GenerationInfo], None]


def rank_and_crowding(objectives: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pareto rank (0 = first front) and within-front crowding distance."""
    rank = np.empty(len(objectives), dtype=int)
    crowd = np.empty(len(objectives))
    for r, front in enumerate(non_dominated_sort(objectives)):
        rank[front] = r
        crowd[front] = crowding_distance(objectives[front])
    return rank, crowd


def survivors(objectives: np.ndarray, size: int, fronts: list[list[int]] | None = None) -> np.ndarray:
    """Indices kept by front-filling, the last front cut by descending crowding."""
    chosen: list[int] = []
    for front in fronts if fronts is not None else non_dominated_sort(objectives):
        if len(chosen) + len(front) <= size:
            chosen.extend(front)
            if len(chosen) == size:
                break
            continue
        cd = crowding_distance(objectives[front])
        order = np.lexsort((np.arange(len(front)), -cd))
        chosen.extend(np.asarray(front)[order[: size - len(chosen)]].tolist())
        break
    return np.asarray(chosen, dtype=int)


def distinct_first_fronts(objectives: np.ndarray) -> list[list[int]]:
    """Non-dominated fronts of the distinct objective vectors, followed by the clones' fronts.

    A clone (same objectives as an earlier member) would otherwise share its
    original's rank, and clones of a few points can crowd everything else
    out of the population.
    """
    first = np.asarray(unique_rows(objectives), dtype=int)
    clones = np.setdiff1d(np.arange(len(objectives)), first)
    fronts = [first[f].tolist() for f in non_dominated_sort(objectives[first])]
    if len(clones):
        fronts += [clones[f].tolist() for f in non_dominated_sort(objectives[clones])]
    return fronts


def rbrw_probability(rank: int, n: int) -> float:
    """Roulette probability of the individual holding ``rank`` (1-based, N = fittest)."""
    if n < 1 or not 1 <= rank <= n:
        raise ValueError(f"rank must lie in [1, {n}], got {rank}")
    return 2.0 * rank / (n * (n + 1))


def _tournament_select(rank, crowd, count, rng):
    def better(a, b):
        return rank[a] < rank[b] or (rank[a] == rank[b] and crowd[a] > crowd[b])
    return binary_tournament(better, len(rank), count, rng)


def _rbrw_select(rank, crowd, count, rng):
    n = len(rank)
    order = np.lexsort((np.arange(n), -crowd, rank))  # fittest first
    probs = np.empty(n)
    probs[order] = [rbrw_probability(n - pos, n) for pos in range(n)]
    return rng.choice(n, size=count, p=probs / probs.sum())


def _run(instance: Instance, config: AlgorithmConfig, select, on_generation: Callback | None) -> Front:
    rng = np.random.default_rng(config.seed)
    problem = Problem.from_config(instance, config)
    n = config.population_size
    keys = random_keys(rng, (n, problem.length))
    objs, plans = problem.evaluate(keys)
    rank, crowd = rank_and_crowding(objs)
    gen = 0
    if on_generation:
        on_generation(GenerationInfo(gen, problem.evaluations, objs, feasible_mask(plans)))

    while problem.evaluations < config.fe_budget:
        n_cross, n_mut = offspring_budget(config, problem.evaluations)
        if n_cross + n_mut == 0:
            break
        parents = keys[select(rank, crowd, n_cross + n_mut, rng)]
        kids = variation(parents, config, rng, n_cross, n_mut)
        kid_objs, kid_plans = problem.evaluate(kids)

        all_keys = np.vstack([keys, kids])
        all_objs = np.vstack([objs, kid_objs])
        all_plans = plans + kid_plans
        fronts = distinct_first_fronts(all_objs)
        keep = survivors(all_objs, n, fronts)
        keys, objs = all_keys[keep], all_objs[keep]
        plans = [all_plans[i] for i in keep]
        # survivors keep whole fronts except the last, so ranks carry over
        all_rank = np.empty(len(all_objs), dtype=int)
        for r, front in enumerate(fronts):
            all_rank[front] = r
        rank = all_rank[keep]
        crowd = np.empty(n)
        for r in np.unique(rank):
            members = np.flatnonzero(rank == r)
            crowd[members] = crowding_distance(objs[members])
        gen += 1
        if on_generation:
            on_generation(GenerationInfo(gen, problem.evaluations, objs, feasible_mask(plans)))

    return final_front(objs, plans, config)


def run_nsga2(instance: Instance, config: AlgorithmConfig, on_generation: Callback | None = None) -> Front:
    """NSGA-II with binary tournament on (rank, crowding)."""
    return _run(instance, config, _tournament_select, on_generation)


def run_nrga(instance: Instance, config: AlgorithmConfig, on_generation: Callback | None = None) -> Front:
    """NRGA: rank-based roulette wheel over the rank-then-crowding ordering."""
    return _run(instance, config, _rbrw_select, on_generation)
