"""Taguchi parameter tuning: orthogonal arrays, S/N ratios, normalization, goal-programming response."""

from __future__ import annotations

import itertools
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .instance import Instance
from .metrics import MetricError, ideal_and_ranges, metric_row, quality_metric
from .moea import AlgorithmConfig, default_config, run

# Response weights in priority order of the goal-programming step.
WEIGHTS = {"QM": 100.0, "MID": 10.0, "SM": 1.0, "DM": 1.0}
METRICS = ("QM", "SM", "MID", "DM")
DIRECTIONS = {"QM": "maximize", "SM": "minimize", "MID": "minimize", "DM": "maximize"}
SNR_FORMS = ("smaller", "larger")
DEFAULT_REPETITIONS = 3
# Responses are floored here before the S/N log so an all-zero row stays finite.
RESPONSE_FLOOR = 1e-9

LEVEL_GRIDS: dict[str, dict[str, tuple]] = {
    "NSGA2": {
        "population_size": (50, 100, 150),
        "crossover_fraction": (0.7, 0.8, 0.9),
        "mutation_fraction": (0.3, 0.2, 0.1),
        "mutation_rate": (0.03, 0.05, 0.07),
    },
    "SPEA2": {
        "population_size": (50, 100, 150),
        "archive_size": (100, 200, 300),
        "crossover_fraction": (0.7, 0.8, 0.9),
        "mutation_fraction": (0.3, 0.2, 0.1),
        "mutation_rate": (0.03, 0.05, 0.07),
    },
}
LEVEL_GRIDS["NRGA"] = dict(LEVEL_GRIDS["NSGA2"])
LEVEL_GRIDS["PESA2"] = dict(LEVEL_GRIDS["SPEA2"], selection_pressure=(2, 3, 4), deletion_pressure=(1, 2, 3))


class DesignError(ValueError):
    pass


def _gf3_columns(n_base: int, combos: Sequence[Sequence[int]]) -> np.ndarray:
    """Three-level array whose columns are GF(3) linear forms of ``n_base`` base factors."""
    base = np.array(list(itertools.product(range(3), repeat=n_base)))
    cols = [(base @ np.asarray(c)) % 3 for c in combos]
    return np.stack(cols, axis=1) + 1


L9 = _gf3_columns(2, [(1, 0), (0, 1), (1, 1), (1, 2)])
# a, b, c, a+b, a+2b, a+c, b+c: pairwise independent forms, hence orthogonal.
L27 = _gf3_columns(3, [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (1, 2, 0), (1, 0, 1), (0, 1, 1)])


def orthogonal_array(n_factors: int) -> np.ndarray:
    """L9 for up to 4 factors, L27 for 5 to 7; levels are 1, 2, 3."""
    if 1 <= n_factors <= 4:
        return L9[:, :n_factors].copy()
    if 5 <= n_factors <= 7:
        return L27[:, :n_factors].copy()
    raise DesignError(f"no L9/L27 design for {n_factors} factors (supported: 1..7)")


def is_orthogonal(array: np.ndarray) -> bool:
    """Every pair of columns holds each of the 9 level pairs equally often."""
    array = np.asarray(array)
    levels = np.unique(array)
    want = len(array) / len(levels) ** 2
    for a, b in itertools.combinations(range(array.shape[1]), 2):
        for la, lb in itertools.product(levels, repeat=2):
            if np.count_nonzero((array[:, a] == la) & (array[:, b] == lb)) != want:
                return False
    return True


@dataclass(frozen=True)
class TaguchiDesign:
    factors: tuple[str, ...]
    levels: tuple[tuple, ...]
    array: np.ndarray

    @classmethod
    def from_grid(cls, grid: Mapping[str, Sequence]) -> TaguchiDesign:
        for name, values in grid.items():
            if len(values) != 3:
                raise DesignError(f"factor {name!r} needs exactly 3 levels, got {len(values)}")
        names = tuple(grid)
        return cls(names, tuple(tuple(grid[n]) for n in names), orthogonal_array(len(names)))

    def __len__(self) -> int:
        return len(self.array)

    def settings(self, row: int) -> dict:
        return {f: self.levels[j][self.array[row, j] - 1] for j, f in enumerate(self.factors)}

    def at_levels(self, chosen: Sequence[int]) -> dict:
        return {f: self.levels[j][lv - 1] for j, (f, lv) in enumerate(zip(self.factors, chosen))}


def normalize(column: Sequence[float], direction: str = "maximize") -> np.ndarray:
    """Min-max scaling to [0, 1]; ``minimize`` flips it. A constant column maps to zeros."""
    r = np.asarray(column, dtype=float)
    if r.size == 0:
        raise ValueError("cannot normalize an empty column")
    if direction not in ("maximize", "minimize"):
        raise ValueError(f"direction must be 'maximize' or 'minimize', got {direction!r}")
    lo, hi = r.min(), r.max()
    if hi == lo:
        return np.zeros_like(r)
    return (r - lo) / (hi - lo) if direction == "maximize" else (hi - r) / (hi - lo)


def response(row: Mapping[str, float] | Sequence[float]) -> float:
    """Weighted sum of normalized metrics; a sequence is read in (QM, MID, SM, DM) order."""
    if isinstance(row, Mapping):
        return float(sum(WEIGHTS[m] * row[m] for m in WEIGHTS))
    vals = list(row)
    if len(vals) != 4:
        raise ValueError("response needs 4 normalized values")
    return float(np.dot(list(WEIGHTS.values()), vals))


def snr(values: Sequence[float], form: str = "smaller") -> float:
    """Signal-to-noise ratio in dB.

    ``smaller`` is ``-10 log10(mean y^2)``; ``larger`` is ``-10 log10(mean 1/y^2)``.
    """
    y = np.asarray(values, dtype=float)
    if y.size == 0:
        raise ValueError("snr needs at least one value")
    if form == "smaller":
        ms = float(np.mean(y ** 2))
    elif form == "larger":
        if np.any(y == 0):
            raise ValueError("larger-is-better S/N is undefined for a zero response")
        ms = float(np.mean(1.0 / y ** 2))
    else:
        raise ValueError(f"form must be one of {SNR_FORMS}, got {form!r}")
    if ms == 0:
        raise ValueError("S/N is unbounded for all-zero responses")
    return -10.0 * math.log10(ms)


def main_effects(array: np.ndarray, values: Sequence[float]) -> np.ndarray:
    """Mean of ``values`` over the rows at each level, shape (factors, 3)."""
    array = np.asarray(array)
    v = np.asarray(values, dtype=float)
    if len(v) != len(array):
        raise ValueError("one value per design row is required")
    return np.array([[v[array[:, j] == lv].mean() for lv in (1, 2, 3)] for j in range(array.shape[1])])


def best_levels(array: np.ndarray, sn: Sequence[float]) -> list[int]:
    """Per factor, the level (1..3) with the highest mean S/N; ties go to the lowest level."""
    effects = np.round(main_effects(array, sn), 12)
    return [int(np.argmax(row)) + 1 for row in effects]


@dataclass
class TuningResult:
    algorithm: str
    design: TaguchiDesign
    raw: np.ndarray  # (experiments, repetitions, 4) in METRICS order
    responses: np.ndarray  # (experiments, repetitions)
    sn: np.ndarray  # (experiments,)
    levels: list[int]
    config: AlgorithmConfig

    def report_rows(self) -> list[list]:
        """One CSV row per experiment: levels, mean raw metrics, mean response, S/N."""
        rows = []
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            mean_raw = np.nanmean(self.raw, axis=1)
        for e in range(len(self.design)):
            rows.append([e + 1, *self.design.array[e].tolist(), *mean_raw[e].tolist(),
                         float(self.responses[e].mean()), float(self.sn[e])])
        return rows

    def report_header(self) -> list[str]:
        return ["experiment", *self.design.factors, *METRICS, "response", "sn"]


def _run_cell(args) -> tuple:
    instance, config = args
    return run(instance, config).array()


def _metrics_for(fronts: list[np.ndarray]) -> np.ndarray:
    """Raw (QM, SM, MID, DM) per front, all judged against the same competitors."""
    out = np.full((len(fronts), 4), np.nan)
    nonempty = [f for f in fronts if len(f)]
    if not nonempty:
        return out
    try:
        qm = quality_metric(fronts) if len(fronts) > 1 else [1.0]
    except MetricError:
        qm = [np.nan] * len(fronts)
    best, ranges = ideal_and_ranges(nonempty)
    for e, f in enumerate(fronts):
        row = metric_row(f, best, ranges)
        out[e] = [qm[e], *(np.nan if row[m] is None else row[m] for m in ("SM", "MID", "DM"))]
    return out


def tune(algorithm: str, instances: Sequence[Instance], grid: Mapping[str, Sequence] | None = None,
         repetitions: int = DEFAULT_REPETITIONS, fe_budget: int = 30_000, seed: int = 0,
         n_max: int | None = None, snr_form: str = "smaller", threads: int = 1) -> TuningResult:
    """Full tuning pipeline; returns the chosen levels and the matching config.

    Each (experiment, repetition) cell runs the algorithm on every instance
    with seed ``seed + repetition``. Metrics are computed per instance against
    all experiments of the same repetition, averaged over instances,
    normalized over all cells, and weighted into a response. S/N is taken over
    the repetitions of each experiment.
    """
    base = default_config(algorithm, fe_budget=fe_budget, n_max=n_max, seed=seed)
    design = TaguchiDesign.from_grid(LEVEL_GRIDS[base.algorithm] if grid is None else grid)
    if not instances:
        raise ValueError("tuning needs at least one instance")
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    if snr_form not in SNR_FORMS:
        raise ValueError(f"snr_form must be one of {SNR_FORMS}")
    n_exp = len(design)
    configs = [base.with_(**design.settings(e)) for e in range(n_exp)]
    jobs = [(inst, configs[e].with_(seed=seed + r))
            for r in range(repetitions) for inst in instances for e in range(n_exp)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            fronts = list(pool.map(_run_cell, jobs))
    else:
        fronts = [_run_cell(j) for j in jobs]

    per_inst = np.full((repetitions, len(instances), n_exp, 4), np.nan)
    for r in range(repetitions):
        for i in range(len(instances)):
            start = (r * len(instances) + i) * n_exp
            per_inst[r, i] = _metrics_for(fronts[start:start + n_exp])
    with warnings.catch_warnings():
        # All-NaN slices (e.g. SM on fronts below 3 points) stay NaN on purpose.
        warnings.simplefilter("ignore", RuntimeWarning)
        raw = np.nanmean(per_inst, axis=1).transpose(1, 0, 2)

    flat = raw.reshape(-1, 4)
    norm = np.zeros_like(flat)
    for j, m in enumerate(METRICS):
        col = flat[:, j]
        ok = ~np.isnan(col)
        if ok.any():
            norm[ok, j] = normalize(col[ok], DIRECTIONS[m])
    resp = np.array([response(dict(zip(METRICS, row))) for row in norm]).reshape(n_exp, repetitions)
    sn = np.array([snr(np.maximum(resp[e], RESPONSE_FLOOR), snr_form) for e in range(n_exp)])
    levels = best_levels(design.array, sn)
    return TuningResult(base.algorithm, design, raw, resp, sn, levels, base.with_(**design.at_levels(levels)))
