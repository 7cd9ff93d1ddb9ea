"""Pareto front containers and front-quality metrics (QM, SM, MID, DM, hypervolume)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .decoder import Plan, plan_from_dict, plan_to_dict
from .evaluation import ObjectivePair
from .pareto import non_dominated_mask


class MetricError(ValueError):
    pass


@dataclass
class Front:
    """Mutually non-dominated objective pairs with the plans that produced them."""

    points: list[ObjectivePair]
    plans: list[Plan | None] = field(default_factory=list)
    algorithm: str = ""
    seed: int | None = None
    incomplete: bool = False

    def __post_init__(self):
        self.points = [ObjectivePair(float(a), float(b)) for a, b in self.points]
        if not self.plans:
            self.plans = [None] * len(self.points)
        if len(self.plans) != len(self.points):
            raise ValueError("plans and points differ in length")

    @classmethod
    def from_candidates(cls, points: Sequence, plans: Sequence | None = None, **kw) -> Front:
        """Dominance-filter and de-duplicate candidate points into a front."""
        pts = [ObjectivePair(float(a), float(b)) for a, b in points]
        pls = list(plans) if plans is not None else [None] * len(pts)
        if not pts:
            return cls([], [], **kw)
        mask = non_dominated_mask(pts)
        keep: dict[tuple[float, float], int] = {}
        for idx in np.flatnonzero(mask):
            key = (round(pts[idx][0], 9), round(pts[idx][1], 9))
            keep.setdefault(key, int(idx))
        order = sorted(keep.values(), key=lambda i: (pts[i][0], pts[i][1]))
        return cls([pts[i] for i in order], [pls[i] for i in order], **kw)

    def __len__(self) -> int:
        return len(self.points)

    def array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float).reshape(-1, 2)

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "seed": self.seed,
            "incomplete": self.incomplete,
            "points": [list(p) for p in self.points],
            "plans": [plan_to_dict(pl, p) if pl is not None else None for pl, p in zip(self.plans, self.points)],
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> Front:
        plans = [plan_from_dict(p) if p else None for p in doc.get("plans") or []]
        return cls(
            points=[tuple(p) for p in doc["points"]],
            plans=plans,
            algorithm=doc.get("algorithm", ""),
            seed=doc.get("seed"),
            incomplete=bool(doc.get("incomplete", False)),
        )


def _arr(front) -> np.ndarray:
    if isinstance(front, Front):
        return front.array()
    return np.asarray(front, dtype=float).reshape(-1, 2)


def merged_archive(fronts: Sequence) -> np.ndarray:
    pts = np.vstack([_arr(f) for f in fronts if len(f)]) if any(len(f) for f in fronts) else np.zeros((0, 2))
    if len(pts) == 0:
        return pts
    pts = pts[non_dominated_mask(pts)]
    return np.unique(np.round(pts, 9), axis=0)


def quality_metric(fronts: Mapping[str, object] | Sequence) -> dict | list:
    """Share of each front's points that survive in the merged non-dominated archive.

    Accepts a mapping ``name -> front`` (returns a dict) or a sequence of fronts.
    A point contributed by several fronts credits each of them.
    """
    named = isinstance(fronts, Mapping)
    items = list(fronts.values()) if named else list(fronts)
    if len(items) < 2:
        raise MetricError("quality metric compares at least two fronts")
    archive = merged_archive(items)
    if len(archive) == 0:
        raise MetricError("union of fronts is empty")
    arch_keys = {tuple(p) for p in archive}
    shares = []
    for f in items:
        own = {tuple(p) for p in np.round(_arr(f), 9)}
        shares.append(len(own & arch_keys) / len(arch_keys))
    return dict(zip(fronts.keys(), shares)) if named else shares


def spacing_metric(front) -> float | None:
    """Spread of consecutive gaps along the front; None when fewer than 3 points."""
    pts = _arr(front)
    if len(pts) < 3:
        return None
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
    gaps = np.sqrt((np.diff(pts, axis=0) ** 2).sum(axis=1))
    mean = gaps.mean()
    if mean == 0:
        return 0.0
    return float(np.abs(mean - gaps).sum() / ((len(gaps) - 1) * mean))


def mean_ideal_distance(front, best: Sequence[float], ranges: Sequence[float]) -> float:
    """Mean normalized Euclidean distance of the front to the ideal point ``best``.

    ``ranges`` holds ``max - min`` per objective over the experiment's archive.
    """
    pts = _arr(front)
    if len(pts) == 0:
        raise MetricError("empty front")
    r = np.asarray(ranges, dtype=float)
    if np.any(r == 0):
        raise MetricError("zero objective range")
    norm = (pts - np.asarray(best, dtype=float)) / r
    return float(np.sqrt((norm**2).sum(axis=1)).mean())


def ideal_and_ranges(fronts: Sequence) -> tuple[np.ndarray, np.ndarray]:
    pts = np.vstack([_arr(f) for f in fronts if len(f)])
    return pts.min(axis=0), pts.max(axis=0) - pts.min(axis=0)


def diversification_metric(front) -> float:
    """Euclidean norm of the per-objective ranges of the front."""
    pts = _arr(front)
    if len(pts) == 0:
        raise MetricError("empty front")
    span = pts.max(axis=0) - pts.min(axis=0)
    return float(math.sqrt((span**2).sum()))


def hypervolume(front, reference: Sequence[float]) -> float:
    """Exact area dominated by a 2-objective front and bounded by ``reference``."""
    pts = _arr(front)
    ref = np.asarray(reference, dtype=float)
    if len(pts) == 0:
        return 0.0
    if np.any(pts > ref):
        raise MetricError(f"points beyond the reference point {tuple(ref)}")
    pts = pts[non_dominated_mask(pts)]
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
    area = 0.0
    prev_z2 = ref[1]
    for z1, z2 in pts:
        if z2 < prev_z2:
            area += (ref[0] - z1) * (prev_z2 - z2)
            prev_z2 = z2
    return float(area)


def reference_point(front, margin: float = 0.1) -> tuple[float, float]:
    """Nadir of ``front`` pushed out by ``margin`` times the objective range."""
    pts = _arr(front)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = hi - lo
    pad = np.where(span > 0, margin * span, margin * np.maximum(np.abs(hi), 1.0))
    return float(hi[0] + pad[0]), float(hi[1] + pad[1])


def clip_to_reference(front, reference: Sequence[float]) -> np.ndarray:
    pts = _arr(front)
    return pts[(pts <= np.asarray(reference, dtype=float)).all(axis=1)]


def metric_row(front, best, ranges) -> dict[str, float | None]:
    """SM, MID and DM of one front against experiment-wide ideal/ranges."""
    if len(front) == 0:
        return {"SM": None, "MID": None, "DM": None}
    safe = [r if r > 0 else 1.0 for r in ranges]
    return {
        "SM": spacing_metric(front),
        "MID": mean_ideal_distance(front, best, safe),
        "DM": diversification_metric(front),
    }
