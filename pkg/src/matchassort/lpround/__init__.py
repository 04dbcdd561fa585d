"""LP relaxations for MNL consumers, an in-repo simplex solver, and rounding."""

from .algorithms import Relaxation, algorithm2, algorithm3, solve_relaxation, split_combine
from .relax import build_lp_cardinality, build_lp_unconstrained, recover_fractional
from .rounding import dependent_round, dependent_round_star, independent_round
from .simplex import LinearProgram, LpSolution, solve_lp

__all__ = [
    "LinearProgram", "LpSolution", "Relaxation", "algorithm2", "algorithm3",
    "build_lp_cardinality", "build_lp_unconstrained", "dependent_round", "dependent_round_star",
    "independent_round", "recover_fractional", "solve_lp", "solve_relaxation", "split_combine",
]
