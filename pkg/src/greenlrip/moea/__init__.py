"""Evolutionary algorithms over the random-key encoding."""

from __future__ import annotations

from ..pareto import crowding_distance, dominates, non_dominated_sort
from .config import ALGORITHMS, AlgorithmConfig, ConfigError, default_config
from .core import GenerationInfo, Individual, Problem, RunLog, crossover, mutate, variation
from .nsga2 import rbrw_probability, run_nrga, run_nsga2
from .pesa2 import run_pesa2
from .spea2 import run_spea2

RUNNERS = {"NSGA2": run_nsga2, "NRGA": run_nrga, "SPEA2": run_spea2, "PESA2": run_pesa2}


def run(instance, config: AlgorithmConfig, on_generation=None):
    """Dispatch to the runner named by ``config.algorithm``."""
    return RUNNERS[config.algorithm](instance, config, on_generation)


__all__ = [
    "ALGORITHMS", "AlgorithmConfig", "ConfigError", "GenerationInfo", "Individual", "Problem", "RUNNERS",
    "RunLog", "crossover", "crowding_distance", "default_config", "dominates", "mutate",
    "non_dominated_sort", "rbrw_probability", "run", "run_nrga", "run_nsga2", "run_pesa2", "run_spea2",
    "variation",
]
