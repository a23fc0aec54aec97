from .bnb import solve_mip
from .model import INF, LinearProgram, LpSolution, MixedIntegerProgram, SolverOptions, optimality_report
from .simplex import solve_arrays, solve_lp

__all__ = [
    "INF",
    "LinearProgram",
    "LpSolution",
    "MixedIntegerProgram",
    "SolverOptions",
    "optimality_report",
    "solve_arrays",
    "solve_lp",
    "solve_mip",
]
