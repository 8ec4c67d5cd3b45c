"""Minimum-weight perfect matching of points on the line under concave costs."""

from .costs import (CostSpec, ValidationReport, eval_cost, make_log1p_cost,
                    make_piecewise_cost, make_power_cost, parse_cost,
                    validate_concavity)
from .errors import (InputError, InvariantViolation, MatchingError,
                     PreconditionError)
from .matching import (Arc, ArcClassification, Matching, PointSet,
                       check_parity, classify_arcs, consecutive_pairs_matching,
                       count_crossings, is_nested, matching_weight, uncross)
from .pyramid import (PyramidTable, ReductionEvent, SolveResult, SolverOptions,
                      SolverState, assemble_matching, boundary_value,
                      reduce_step, solve_full_table, solve_matching)

__all__ = [
    "Arc", "ArcClassification", "CostSpec", "InputError", "InvariantViolation",
    "Matching", "MatchingError", "PointSet", "PreconditionError", "PyramidTable",
    "ReductionEvent", "SolveResult", "SolverOptions", "SolverState",
    "ValidationReport", "assemble_matching", "boundary_value", "check_parity",
    "classify_arcs", "consecutive_pairs_matching", "count_crossings",
    "eval_cost", "is_nested", "make_log1p_cost", "make_piecewise_cost",
    "make_power_cost", "matching_weight", "parse_cost", "reduce_step",
    "solve_full_table", "solve_matching", "uncross", "validate_concavity",
]
