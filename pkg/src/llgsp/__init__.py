"""Structure-preserving semi-implicit solvers for the Landau-Lifshitz-Gilbert equation."""

from .errors import BlowupError, DegenerateProjectionError, NumericalFailure, SolverError
from .grid import (
    Grid,
    VectorField,
    exchange_energy,
    laplacian_neumann,
    max_unit_deviation,
    norm_h1,
    norm_l2,
    norm_linf,
)
from .rotation import cayley_matrix, cn_rotate
from .schemes import SchemeConfig, Trajectory, evolve
from .solvers import SolveReport, SolverConfig, bdf1_predictor_solve, helmholtz_solve

__version__ = "0.1.0"

__all__ = [
    "BlowupError",
    "DegenerateProjectionError",
    "Grid",
    "NumericalFailure",
    "SchemeConfig",
    "SolveReport",
    "SolverConfig",
    "SolverError",
    "Trajectory",
    "VectorField",
    "bdf1_predictor_solve",
    "cayley_matrix",
    "cn_rotate",
    "evolve",
    "exchange_energy",
    "helmholtz_solve",
    "laplacian_neumann",
    "max_unit_deviation",
    "norm_h1",
    "norm_l2",
    "norm_linf",
]
