"""Expected squared L2 discrepancy of two-point jittered sampling on the
unit square, and numerical solution of the optimal two-region partition."""

__version__ = "0.1.0"

from .quadrature import gauss_legendre, integrate_1d, integrate_2d
from .regions import (
    Region,
    make_half_plane,
    make_polyline,
    make_quarter_disk,
    make_subgraph,
    unpartitioned,
)
from .discrepancy import expected_l2sq, expected_l2sq_reformulated, l2sq_two_points
from .integral_equation import ResidualContext, residual, residual_vector
from .solver import SolverConfig, SymmetrizedCurve, solve_for_p, sweep
from .mc_oracle import estimate_expected_l2sq

__all__ = [
    "gauss_legendre",
    "integrate_1d",
    "integrate_2d",
    "Region",
    "make_half_plane",
    "make_polyline",
    "make_quarter_disk",
    "make_subgraph",
    "unpartitioned",
    "expected_l2sq",
    "expected_l2sq_reformulated",
    "l2sq_two_points",
    "ResidualContext",
    "residual",
    "residual_vector",
    "SolverConfig",
    "SymmetrizedCurve",
    "solve_for_p",
    "sweep",
    "estimate_expected_l2sq",
]
