"""PESA-II: region-based selection over a hyper-grid laid on the external archive."""

from __future__ import annotations

from collections import Counter
from typing import Callable

import numpy as np

from ..instance import Instance
from ..metrics import Front
from ..pareto import non_dominated_mask
from .config import AlgorithmConfig
from .core import (GenerationInfo, Problem, feasible_mask, final_front, offspring_budget,
                   random_keys, variation)


def grid_cells(objectives: np.ndarray, divisions: int) -> list[tuple[int, ...]]:
    """Hyperbox of each point on a ``divisions``-per-objective grid spanning the points."""
    lo = objectives.min(axis=0)
    span = objectives.max(axis=0) - lo
    scaled = (objectives - lo) / np.where(span > 0, span, 1.0)
    cells = np.minimum((scaled * divisions).astype(int), divisions - 1)
    return [tuple(c) for c in cells.tolist()]


def update_archive(archive_objs: np.ndarray, cand_objs: np.ndarray,
                   archive_keys: np.ndarray | None = None,
                   cand_keys: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Merge candidates into a non-dominated archive.

    Returns the surviving archive indices and the admitted candidate indices.
    A candidate is admitted iff nothing in the archive or among the other
    candidates dominates it; archive members it dominates are evicted. Equal
    objective vectors do not dominate each other, so only exact chromosome
    copies are dropped (when keys are given).
    """
    n_a = len(archive_objs)
    mask = non_dominated_mask(np.vstack([archive_objs, cand_objs]))
    keys = None
    if archive_keys is not None and cand_keys is not None:
        keys = np.vstack([archive_keys, cand_keys])
    seen: set[bytes] = set()
    keep_a, keep_c = [], []
    for j in np.flatnonzero(mask):
        if keys is not None:
            tag = keys[j].tobytes()
            if tag in seen:
                continue
            seen.add(tag)
        if j < n_a:
            keep_a.append(j)
        else:
            keep_c.append(j - n_a)
    return np.asarray(keep_a, dtype=int), np.asarray(keep_c, dtype=int)


def select_sparse(cells: list[tuple], count: int, pressure: int, rng: np.random.Generator) -> np.ndarray:
    """Region-based selection: ``pressure``-way tournaments between occupied boxes.

    The least crowded box of each tournament wins and contributes a
    uniformly drawn member, so every box is equally likely to compete no
    matter how many archive members it holds.
    """
    boxes: dict[tuple, list[int]] = {}
    for idx, c in enumerate(cells):
        boxes.setdefault(c, []).append(idx)
    members = list(boxes.values())
    load = np.array([len(m) for m in members])
    picks = rng.integers(len(members), size=(count, pressure))
    won = picks[np.arange(count), np.argmin(load[picks], axis=1)]
    return np.array([members[b][rng.integers(len(members[b]))] for b in won.tolist()], dtype=int)


def delete_crowded(cells: list[tuple], excess: int, pressure: int, rng: np.random.Generator) -> np.ndarray:
    """Indices removed by ``pressure``-way tournaments won by the most crowded box."""
    occupancy = Counter(cells)
    alive = list(range(len(cells)))
    removed = []
    for _ in range(excess):
        picks = rng.integers(len(alive), size=pressure)
        loads = [occupancy[cells[alive[p]]] for p in picks]
        victim = alive.pop(int(picks[int(np.argmax(loads))]))
        occupancy[cells[victim]] -= 1
        removed.append(victim)
    return np.asarray(removed, dtype=int)


def run_pesa2(instance: Instance, config: AlgorithmConfig,
              on_generation: Callable[[GenerationInfo], None] | None = None) -> Front:
    rng = np.random.default_rng(config.seed)
    problem = Problem.from_config(instance, config)
    n, n_bar = config.population_size, config.archive_size

    keys = random_keys(rng, (n, problem.length))
    objs, plans = problem.evaluate(keys)
    a_keys, a_objs, a_plans = keys[:0], objs[:0], []
    gen = 0
    while True:
        keep_a, keep_c = update_archive(a_objs, objs, a_keys, keys)
        a_keys = np.vstack([a_keys[keep_a], keys[keep_c]])
        a_objs = np.vstack([a_objs[keep_a], objs[keep_c]])
        a_plans = [a_plans[i] for i in keep_a] + [plans[i] for i in keep_c]
        if len(a_objs) > n_bar:
            cells = grid_cells(a_objs, config.grid_divisions)
            gone = delete_crowded(cells, len(a_objs) - n_bar, config.deletion_pressure, rng)
            stay = np.setdiff1d(np.arange(len(a_objs)), gone)
            a_keys, a_objs = a_keys[stay], a_objs[stay]
            a_plans = [a_plans[i] for i in stay]
        if on_generation:
            on_generation(GenerationInfo(gen, problem.evaluations, a_objs, feasible_mask(a_plans)))
        if problem.evaluations >= config.fe_budget:
            break
        n_cross, n_mut = offspring_budget(config, problem.evaluations)
        if n_cross + n_mut == 0:
            break
        cells = grid_cells(a_objs, config.grid_divisions)
        picks = select_sparse(cells, n_cross + n_mut, config.selection_pressure, rng)
        keys = variation(a_keys[picks], config, rng, n_cross, n_mut, mutate_children=True)
        objs, plans = problem.evaluate(keys)
        gen += 1

    return final_front(a_objs, a_plans, config)
