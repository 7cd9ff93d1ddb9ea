"""Exhaustive Pareto enumeration over the decoder's own decision space.

Every plan the decoder can produce is fixed by a DC order, a retailer order,
one feasible order frequency per operating DC and the two vehicle orders.
Enumerating exactly those choices and building plans with
:meth:`Decoder.build` makes the enumerated space and the MOEA search space
coincide, which is what lets the enumerator act as an oracle.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from ..decoder import DEFAULT_PENALTY_RATE, Decoder, Plan, assign_retailers, default_n_max
from ..evaluation import ObjectivePair, evaluate
from ..instance import Instance
from ..metrics import Front

DEFAULT_MAX_SPACE = 10**8


class SpaceTooLargeError(ValueError):
    def __init__(self, size: int, limit: int):
        super().__init__(f"decision space has {size} raw points, limit is {limit}")
        self.size = size
        self.limit = limit


class InfeasibleInstanceError(RuntimeError):
    pass


def decision_space_size(instance: Instance, n_max: int) -> int:
    """Raw count of (orders x frequencies) combinations before capacity pruning."""
    k, i, vi, vo = instance.size
    return (math.factorial(k) * math.factorial(i) * math.factorial(vi) * math.factorial(vo)
            * n_max**k)


@dataclass
class Enumeration:
    objectives: np.ndarray
    plans: list[Plan]
    incomplete: bool = False


def enumerate_plans(instance: Instance, n_max: int | None = None, max_space: int = DEFAULT_MAX_SPACE,
                    time_limit: float | None = None,
                    penalty_rate: float = DEFAULT_PENALTY_RATE) -> Enumeration:
    """All distinct feasible plans of the decision space with their objectives."""
    n_max = default_n_max(instance) if n_max is None else n_max
    size = decision_space_size(instance, n_max)
    if size > max_space:
        raise SpaceTooLargeError(size, max_space)
    decoder = Decoder(instance, n_max, penalty_rate)
    k, i, vi, vo = instance.size
    vin_perms = list(itertools.permutations(range(vi)))
    vout_perms = list(itertools.permutations(range(vo)))
    deadline = None if time_limit is None else time.monotonic() + time_limit
    seen: set[Plan] = set()
    incomplete = False

    for dc_order in itertools.permutations(range(k)):
        for r_order in itertools.permutations(range(i)):
            if deadline is not None and time.monotonic() > deadline:
                incomplete = True
                break
            assignment, unassigned = assign_retailers(r_order, dc_order, instance)
            if unassigned:
                continue
            demands = decoder.dc_demands(assignment)
            dcs = sorted(demands)
            options = [decoder.feasible_frequencies(demands[d]) for d in dcs]
            if not all(options):
                continue
            for combo in itertools.product(*options):
                freq = dict(zip(dcs, combo))
                for vin in vin_perms:
                    for vout in vout_perms:
                        plan = decoder.build(dc_order, r_order, assignment, unassigned, freq, vin, vout)
                        if plan.feasible:
                            seen.add(plan)
        if incomplete:
            break

    plans = sorted(seen, key=lambda p: (p.open_dcs, p.assignment, p.order_freq, p.inbound_trips,
                                        tuple((t.dc, t.vehicle, t.retailers) for t in p.tours)))
    objs = np.array([evaluate(p, instance) for p in plans], dtype=float).reshape(-1, 2)
    return Enumeration(objs, plans, incomplete)


def enumerate_pareto(instance: Instance, n_max: int | None = None, max_space: int = DEFAULT_MAX_SPACE,
                     time_limit: float | None = None) -> Front:
    """Exact non-dominated set of the decision space; empty when nothing is feasible."""
    found = enumerate_plans(instance, n_max, max_space, time_limit)
    return Front.from_candidates(found.objectives, found.plans, algorithm="enumerate",
                                 incomplete=found.incomplete)


class EnumerationBackend:
    """Single-objective exact solver over the enumerated candidate set.

    ``solve`` minimizes ``c1*z1 + c2*z2`` subject to optional upper bounds
    on each objective and returns ``None`` when no candidate qualifies.
    """

    def __init__(self, instance: Instance, n_max: int | None = None, max_space: int = DEFAULT_MAX_SPACE,
                 time_limit: float | None = None):
        self.instance = instance
        self.enumeration = enumerate_plans(instance, n_max, max_space, time_limit)
        self.calls = 0

    def solve(self, weights: tuple[float, float],
              upper: tuple[float | None, float | None] = (None, None)) -> tuple[ObjectivePair, Plan] | None:
        self.calls += 1
        objs = self.enumeration.objectives
        if len(objs) == 0:
            return None
        ok = np.ones(len(objs), dtype=bool)
        for j, ub in enumerate(upper):
            if ub is not None:
                ok &= objs[:, j] <= ub
        if not ok.any():
            return None
        idx = np.flatnonzero(ok)
        score = weights[0] * objs[idx, 0] + weights[1] * objs[idx, 1]
        # ties fall to the lexicographically smaller (z1, z2), then the lower index
        best = idx[np.lexsort((idx, objs[idx, 1], objs[idx, 0], score))[0]]
        return ObjectivePair(*objs[best]), self.enumeration.plans[best]
