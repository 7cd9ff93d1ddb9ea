"""Pieces shared by all four algorithms: evaluation with budget, variation, run logging."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..decoder import Decoder, Plan
from ..evaluation import Evaluator, ObjectivePair
from ..instance import Instance
from ..metrics import Front, hypervolume, reference_point
from .config import AlgorithmConfig

# Keys live in the open interval (0, 1).
_KEY_EPS = 1e-12


@dataclass
class Individual:
    chromosome: np.ndarray
    objectives: ObjectivePair | None = None
    plan: Plan | None = None
    rank: int | None = None
    crowding: float | None = None
    fitness: float | None = None


@dataclass
class GenerationInfo:
    """Snapshot handed to per-generation callbacks."""

    generation: int
    evaluations: int
    objectives: np.ndarray  # current elite set (population or archive)
    feasible: np.ndarray  # mask over ``objectives``


class Problem:
    """Decodes and evaluates chromosomes for one instance, counting every request.

    Chromosomes that decode identically share a signature (the four priority
    orders plus each DC key's frequency cell), so repeat decodes are served
    from a cache. Cache hits still count as evaluations.
    """

    def __init__(self, instance: Instance, n_max: int | None = None, penalty_rate: float | None = None,
                 use_two_opt: bool = False):
        kw = {} if penalty_rate is None else {"penalty_rate": penalty_rate}
        self.instance = instance
        self.decoder = Decoder(instance, n_max, use_two_opt=use_two_opt, **kw)
        self.evaluator = Evaluator(instance)
        self.length = instance.chromosome_length
        self._bounds = np.cumsum((0,) + tuple(instance.size))
        self._cache: dict[tuple, tuple[Plan, ObjectivePair]] = {}

    @classmethod
    def from_config(cls, instance: Instance, config: AlgorithmConfig) -> Problem:
        return cls(instance, config.n_max, config.penalty_rate)

    @property
    def evaluations(self) -> int:
        return self.evaluator.count

    def signatures(self, keys: np.ndarray) -> list[tuple]:
        b = self._bounds
        blocks = [np.argsort(keys[:, b[j]:b[j + 1]], axis=1, kind="stable") for j in range(4)]
        frac = np.mod(keys[:, b[0]:b[1]] * self.decoder.subkey_scale, 1.0)
        cells = np.minimum((frac * self.decoder.cells).astype(np.int64), self.decoder.cells - 1)
        return list(map(tuple, np.hstack(blocks + [cells]).tolist()))

    def evaluate(self, keys: np.ndarray) -> tuple[np.ndarray, list[Plan]]:
        """Objectives (rows of z1, z2) and plans for a batch of chromosomes."""
        keys = np.atleast_2d(keys)
        out = np.empty((len(keys), 2))
        plans = []
        b = self._bounds
        for r, sig in enumerate(self.signatures(keys)):
            hit = self._cache.get(sig)
            if hit is None:
                orders = [sig[b[j]:b[j + 1]] for j in range(4)]
                plan = self.decoder.decode_orders(*orders, sig[b[4]:])
                hit = (plan, self.evaluator(plan))
                self._cache[sig] = hit
            else:
                self.evaluator.count += 1
            plans.append(hit[0])
            out[r] = hit[1]
        return out, plans


def random_keys(rng: np.random.Generator, shape) -> np.ndarray:
    return np.clip(rng.random(shape), _KEY_EPS, 1.0 - _KEY_EPS)


def crossover(p1: np.ndarray, p2: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Arithmetic blend with an independent weight per gene; returns both mirror children."""
    lam = rng.random(p1.shape)
    return lam * p1 + (1 - lam) * p2, (1 - lam) * p1 + lam * p2


def mutate(x: np.ndarray, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Resample each key with probability ``rate``; at least one key changes when ``rate > 0``."""
    child = x.copy()
    mask = rng.random(x.shape) < rate
    if rate > 0 and not mask.any():
        mask[rng.integers(len(x))] = True
    child[mask] = random_keys(rng, int(mask.sum()))
    return child


def variation(parents: np.ndarray, config: AlgorithmConfig, rng: np.random.Generator,
              n_cross: int | None = None, n_mut: int | None = None,
              mutate_children: bool = False) -> np.ndarray:
    """Offspring pool from a parent array.

    The first ``n_cross`` rows are paired up for crossover, the next
    ``n_mut`` rows are mutated. Counts default to the config's fractions.
    With ``mutate_children`` the crossover children are mutated as well.
    """
    dc, dm = config.offspring_counts
    n_cross = dc if n_cross is None else n_cross
    n_mut = dm if n_mut is None else n_mut
    if len(parents) < n_cross + n_mut:
        raise ValueError(f"need {n_cross + n_mut} parents, got {len(parents)}")
    kids = []
    for j in range(0, n_cross - 1, 2):
        pair = crossover(parents[j], parents[j + 1], rng)
        if mutate_children:
            pair = tuple(mutate(c, config.mutation_rate, rng) for c in pair)
        kids.extend(pair)
    for j in range(n_cross, n_cross + n_mut):
        kids.append(mutate(parents[j], config.mutation_rate, rng))
    return np.array(kids).reshape(-1, parents.shape[1])


def offspring_budget(config: AlgorithmConfig, used: int) -> tuple[int, int]:
    """Crossover/mutation counts for the next generation, shrunk to the remaining budget."""
    n_cross, n_mut = config.offspring_counts
    left = config.fe_budget - used
    if n_cross + n_mut <= left:
        return n_cross, n_mut
    n_cross = min(n_cross, left - left % 2)
    return n_cross, max(0, min(n_mut, left - n_cross))


def binary_tournament(better: Callable[[int, int], bool], size: int, count: int,
                      rng: np.random.Generator) -> np.ndarray:
    picks = rng.integers(size, size=(count, 2))
    return np.array([a if better(a, b) else b for a, b in picks.tolist()], dtype=int)


def feasible_mask(plans: list[Plan]) -> np.ndarray:
    return np.array([p.feasible for p in plans], dtype=bool)


def final_front(objectives: np.ndarray, plans: list[Plan], config: AlgorithmConfig) -> Front:
    """Feasible, non-dominated, de-duplicated front from an elite set."""
    keep = [i for i, p in enumerate(plans) if p.feasible]
    return Front.from_candidates(objectives[keep], [plans[i] for i in keep],
                                 algorithm=config.algorithm, seed=config.seed)


@dataclass
class RunLog:
    """Per-generation log rows; the hypervolume reference is frozen at the first feasible generation."""

    rows: list[dict] = field(default_factory=list)
    reference: tuple[float, float] | None = None

    COLUMNS = ("generation", "evaluations", "archive_size", "best_z1", "best_z2", "hypervolume")

    def __call__(self, info: GenerationInfo) -> None:
        pts = info.objectives[info.feasible]
        if len(pts) and self.reference is None:
            self.reference = reference_point(pts)
        if len(pts):
            inside = pts[(pts <= np.asarray(self.reference)).all(axis=1)]
            hv = hypervolume(inside, self.reference)
            best = pts.min(axis=0)
        else:
            hv, best = 0.0, (float("nan"), float("nan"))
        self.rows.append({
            "generation": info.generation,
            "evaluations": info.evaluations,
            "archive_size": int(len(pts)),
            "best_z1": float(best[0]),
            "best_z2": float(best[1]),
            "hypervolume": hv,
        })
