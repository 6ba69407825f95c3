"""Fractional and logarithmic Laplacians on intervals, their nonlinear
variational problems, and small-order (s -> 0) sweeps."""

from .core import (
    Constants,
    Grid1D,
    GridFunction,
    SmallOrderError,
    frac_constant,
    log_constants,
    make_grid,
    norm_lp,
)
from .operators import OperatorMatrix, assemble_fractional, assemble_log, h_omega, qform
from .spectral import EigenPair, eigen_expansion_check, first_eigenpair

__version__ = "0.1.0"

__all__ = [
    "Constants", "Grid1D", "GridFunction", "SmallOrderError", "frac_constant",
    "log_constants", "make_grid", "norm_lp", "OperatorMatrix", "assemble_fractional",
    "assemble_log", "h_omega", "qform", "EigenPair", "eigen_expansion_check",
    "first_eigenpair",
]
