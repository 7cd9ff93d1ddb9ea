"""Augmented epsilon-constraint driver over a pluggable single-objective exact backend."""

from __future__ import annotations

from typing import Protocol

import numpy as np

from ..decoder import Plan
from ..evaluation import ObjectivePair
from ..metrics import Front
from .enumerate import InfeasibleInstanceError

DEFAULT_DELTA = 1e-4


class ExactBackend(Protocol):
    def solve(self, weights: tuple[float, float],
              upper: tuple[float | None, float | None] = (None, None)) -> tuple[ObjectivePair, Plan] | None:
        ...


def _tol(value: float) -> float:
    return 1e-9 * max(1.0, abs(value))


def payoff_table(backend: ExactBackend) -> tuple[tuple[ObjectivePair, Plan], tuple[ObjectivePair, Plan]]:
    """Lexicographic optima: (min z1 then z2) and (min z2 then z1)."""
    first = backend.solve((1.0, 0.0))
    if first is None:
        raise InfeasibleInstanceError("no feasible plan for the payoff table")
    z1_best = first[0].z1
    lex1 = backend.solve((0.0, 1.0), (z1_best + _tol(z1_best), None))
    z2_best = backend.solve((0.0, 1.0))[0].z2
    lex2 = backend.solve((1.0, 0.0), (None, z2_best + _tol(z2_best)))
    return lex1, lex2


def augmented_eps_constraint(backend: ExactBackend, instance=None, grid_points: int = 10,
                             delta: float = DEFAULT_DELTA, refine: bool = True) -> Front:
    """Pareto front from an e2-sweep of ``min z1 - delta * s / r2`` with ``z2 + s = e2``.

    Dropping the constant ``delta * e2 / r2`` turns each sweep step into
    ``min z1 + (delta / r2) * z2`` subject to ``z2 <= e2``. With ``refine``,
    every gap between neighbouring solutions is probed once more just below
    the upper neighbour's z2, which makes the result complete on discrete
    spaces regardless of the grid.
    """
    bound = getattr(backend, "instance", None)
    if instance is not None and bound is not None and bound is not instance:
        raise ValueError("backend was built for a different instance")
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    if not 1e-6 < delta < 1e-3:
        raise ValueError("delta must lie in (1e-6, 1e-3)")
    lex1, lex2 = payoff_table(backend)
    z2_hi, z2_lo = lex1[0].z2, lex2[0].z2
    r2 = z2_hi - z2_lo
    found: dict[tuple[float, float], tuple[ObjectivePair, Plan]] = {}

    def keep(sol):
        pt = sol[0]
        found.setdefault((round(pt.z1, 9), round(pt.z2, 9)), sol)

    keep(lex1)
    keep(lex2)
    if r2 <= _tol(z2_hi):
        return _front(found)
    weights = (1.0, delta / r2)
    for e2 in np.linspace(z2_lo, z2_hi, grid_points)[1:-1]:
        sol = backend.solve(weights, (None, float(e2)))
        if sol is not None:
            keep(sol)

    if refine:
        probed: set[float] = set()
        while True:
            pts = sorted({(p[0].z2, p[0].z1) for p in found.values()})
            todo = [z2 for z2, _ in pts[1:] if z2 not in probed]
            if not todo:
                break
            for z2 in todo:
                probed.add(z2)
                sol = backend.solve(weights, (None, z2 - _tol(z2)))
                if sol is not None:
                    keep(sol)
    return _front(found)


def _front(found) -> Front:
    sols = list(found.values())
    return Front.from_candidates([s[0] for s in sols], [s[1] for s in sols], algorithm="epsilon")
