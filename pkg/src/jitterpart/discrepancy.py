"""Expected squared L2 discrepancy of a two-point jittered sample.

Three independent routes are provided: the general variance-plus-bias
integrand (any area split), the fast equal-split reformulation
``1/72 + 2∫(f1*xy - f1^2)``, and an exact closed form for one concrete
point pair (used per-sample by the Monte Carlo oracle).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quadrature import integrate_2d
from .regions import Point, Region

_CLAMP_SLACK = 1e-12
DEFAULT_TOL = 1e-6


class WrongAreaError(ValueError):
    """Region area is not 1/2, required by the reformulated route."""


@dataclass(frozen=True)
class DiscrepancyResult:
    """Expected squared L2 discrepancy with quadrature error estimate."""

    value: float
    error_estimate: float
    route: str
    converged: bool = True


@dataclass(frozen=True)
class BernoulliPair:
    """Success probabilities of the two box-indicator variables at (x, y)."""

    q1: np.ndarray | float
    q2: np.ndarray | float


def bernoulli_pair(region: Region, x, y) -> BernoulliPair:
    """q1 = f1/p and q2 = f2/(1-p), clamped to [0, 1] against rounding."""
    p = region.area
    if p is None:
        raise ValueError("unpartitioned baseline has no Bernoulli decomposition")
    f1 = region.f1(x, y)
    q1 = np.clip(f1 / p, 0.0, 1.0)
    q2 = np.clip((np.asarray(x, float) * np.asarray(y, float) - f1) / (1.0 - p), 0.0, 1.0)
    return BernoulliPair(q1=q1, q2=q2)


def _general_integrand(region: Region):
    p = region.area

    def integrand(x, y):
        pair = bernoulli_pair(region, x, y)
        q1, q2 = pair.q1, pair.q2
        variance = q1 * (1.0 - q1) + q2 * (1.0 - q2)
        bias = 0.5 * (q1 + q2) - x * y
        return 0.25 * variance + bias * bias

    return integrand


def expected_l2sq(region: Region, tol: float = DEFAULT_TOL) -> DiscrepancyResult:
    """Expected squared L2 discrepancy via the pointwise variance+bias law.

    One point is uniform on Omega, the other on the complement; for the
    unpartitioned baseline both are i.i.d. uniform and the integrand
    reduces to x*y*(1-x*y)/2.
    """
    if region.area is None:
        f = lambda x, y: 0.5 * x * y * (1.0 - x * y)
    else:
        f = _general_integrand(region)
    res = integrate_2d(f, (0.0, 1.0, 0.0, 1.0), tol)
    return DiscrepancyResult(res.value, res.error_estimate, "general", res.converged)


def expected_l2sq_reformulated(region: Region, tol: float = DEFAULT_TOL) -> DiscrepancyResult:
    """Equal-split fast route: value = 1/72 + 2 ∫ (f1*x*y - f1^2) dx dy.

    Valid only when the region area is 1/2 (within 1e-9); the bias term of
    the general route vanishes identically there.
    """
    p = region.area
    if p is None or abs(p - 0.5) > 1e-9:
        raise WrongAreaError(f"reformulated route requires area 1/2, got {p}")

    def integrand(x, y):
        f1 = region.f1(x, y)
        return f1 * x * y - f1 * f1

    res = integrate_2d(integrand, (0.0, 1.0, 0.0, 1.0), 0.5 * tol)
    return DiscrepancyResult(
        1.0 / 72.0 + 2.0 * res.value, 2.0 * res.error_estimate, "reformulated_half", res.converged
    )


def l2sq_two_points_batch(x1, y1, x2, y2):
    """Vectorized closed form of the squared L2 discrepancy of two points.

    Obtained by expanding the defining integral for two points in the unit
    square:  1/9 - (1/4) Σ_i (1-x_i^2)(1-y_i^2)
                  + (1/4) Σ_ij (1-max(x_i,x_j))(1-max(y_i,y_j)).
    """
    x1, y1, x2, y2 = (np.asarray(v, dtype=float) for v in (x1, y1, x2, y2))
    cross = (1.0 - np.maximum(x1, x2)) * (1.0 - np.maximum(y1, y2))
    return (
        1.0 / 9.0
        - 0.25 * ((1 - x1 * x1) * (1 - y1 * y1) + (1 - x2 * x2) * (1 - y2 * y2))
        + 0.25 * ((1 - x1) * (1 - y1) + (1 - x2) * (1 - y2) + 2.0 * cross)
    )


def l2sq_two_points(a: Point, b: Point) -> float:
    """Squared L2 discrepancy of the concrete two-point set {a, b}."""
    for x, y in (a, b):
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise ValueError(f"point ({x}, {y}) is outside the unit square")
    return float(l2sq_two_points_batch(a[0], a[1], b[0], b[1]))
