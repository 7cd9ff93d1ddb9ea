"""Exact machinery: enumeration oracle, augmented epsilon-constraint, MILP model and LP export."""

from .enumerate import (DEFAULT_MAX_SPACE, EnumerationBackend, InfeasibleInstanceError, SpaceTooLargeError,
                        decision_space_size, enumerate_pareto, enumerate_plans)
from .epsilon import DEFAULT_DELTA, augmented_eps_constraint, payoff_table
from .lpformat import LpFormatError, ParsedLp, export_lp, lp_text, parse_lp
from .milp import (CompiledModel, MilpModel, ModelSizeError, build_milp, induced_assignment, linearize_bilinear,
                   linearize_binary_product, linearize_sqrt, subset_sums)

__all__ = [
    "CompiledModel", "DEFAULT_DELTA", "DEFAULT_MAX_SPACE", "EnumerationBackend", "InfeasibleInstanceError",
    "LpFormatError", "MilpModel", "ModelSizeError", "ParsedLp", "SpaceTooLargeError", "augmented_eps_constraint",
    "build_milp", "decision_space_size", "enumerate_pareto", "enumerate_plans", "export_lp", "induced_assignment",
    "linearize_bilinear", "linearize_binary_product", "linearize_sqrt", "lp_text", "parse_lp", "payoff_table",
    "subset_sums",
]
