"""First-order optimality residual for a candidate boundary polynomial.

A curve is optimal for the jittered-sampling objective exactly when the
residual below vanishes along it.  ``residual`` evaluates one collocation
point through adaptive quadrature; ``residual_vector`` evaluates all nodes
through exact polynomial antiderivatives (the two agree to quadrature
tolerance and are cross-checked in the tests).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quadrature import QuadratureRule, gauss_legendre, integrate_1d, integrate_2d
from .regions import Point, Region

MAX_DEGREE = 10

_pv = np.polynomial.polynomial.polyval


class PointsNotOrderedError(ValueError):
    """Rectangle-balance points must be ordered left to right."""


class RegionNotHalfError(ValueError):
    """Rectangle balance is defined for equal-area splits only."""


class AsymmetricCurveError(ValueError):
    """Operation requires a curve symmetric about the diagonal."""


@dataclass(frozen=True)
class ResidualContext:
    """Candidate polynomial g(x) = sum c_k x^k on [0, alpha] with area target p."""

    coefficients: np.ndarray
    alpha: float
    p: float

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=float)
        object.__setattr__(self, "coefficients", coeffs)
        if coeffs.ndim != 1 or coeffs.size < 1 or coeffs.size > MAX_DEGREE + 1:
            raise ValueError(f"need 1..{MAX_DEGREE + 1} coefficients, got shape {coeffs.shape}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p must be in (0, 1), got {self.p}")

    def g(self, x):
        return _pv(np.asarray(x, dtype=float), self.coefficients)

    def g_prime(self, x):
        return _pv(np.asarray(x, dtype=float), np.polynomial.polynomial.polyder(self.coefficients))


def _weighted_antideriv(coeffs: np.ndarray) -> np.ndarray:
    """Antiderivative of (1 - y) * g(y) for polynomial g."""
    c = np.asarray(coeffs, dtype=float)
    integrand = np.concatenate([c, [0.0]]) - np.concatenate([[0.0], c])
    return np.polynomial.polynomial.polyint(integrand)


def _residual_terms_exact(ctx: ResidualContext, x):
    """(A, B, g') with A + g'*B the residual, via exact polynomial integrals."""
    x = np.asarray(x, dtype=float)
    g = ctx.g(x)
    gp = ctx.g_prime(x)
    H = _weighted_antideriv(ctx.coefficients)
    h_alpha = _pv(ctx.alpha, H)
    tail_from_g = h_alpha - _pv(g, H)  # ∫_{g(x)}^{alpha} (1-y) g(y) dy
    tail_from_x = h_alpha - _pv(x, H)  # ∫_{x}^{alpha}    (1-y) g(y) dy
    p = ctx.p
    a_term = (1 - 2 * p - 4 * x * g) * (1 - g) + (4 * p - 1) * x * (1 - g * g) - 4 * tail_from_g
    b_term = (1 - 2 * p - 4 * x * g) * (1 - x) + (4 * p - 1) * g * (1 - x * x) - 4 * tail_from_x
    return a_term, b_term, gp


def residual_exact(ctx: ResidualContext, x):
    """Residual at x (vectorized), tail integrals done analytically."""
    a_term, b_term, gp = _residual_terms_exact(ctx, x)
    return a_term + gp * b_term


def residual(x: float, ctx: ResidualContext, quad_tol: float = 1e-9) -> float:
    """Residual at a single x with tail integrals by adaptive quadrature."""
    if not 0.0 <= x <= ctx.alpha:
        raise ValueError(f"x must lie in [0, {ctx.alpha}], got {x}")
    g = float(ctx.g(x))
    gp = float(ctx.g_prime(x))
    weighted = lambda y: (1.0 - y) * _pv(y, ctx.coefficients)
    tail_from_g = integrate_1d(weighted, g, ctx.alpha, quad_tol).value
    tail_from_x = integrate_1d(weighted, x, ctx.alpha, quad_tol).value
    p = ctx.p
    a_term = (1 - 2 * p - 4 * x * g) * (1 - g) + (4 * p - 1) * x * (1 - g * g) - 4 * tail_from_g
    b_term = (1 - 2 * p - 4 * x * g) * (1 - x) + (4 * p - 1) * g * (1 - x * x) - 4 * tail_from_x
    return a_term + gp * b_term


def residual_vector(ctx: ResidualContext, rule: QuadratureRule | None = None) -> np.ndarray:
    """Residual at every collocation node plus the two endpoint constraints.

    The last two entries are g(0) - alpha and g(alpha); they are returned
    unweighted (the solver applies its constraint weight).
    """
    if rule is None:
        rule = gauss_legendre(200, 0.0, ctx.alpha)
    values = residual_exact(ctx, rule.nodes)
    g0 = float(ctx.g(0.0)) - ctx.alpha
    ga = float(ctx.g(ctx.alpha))
    return np.concatenate([values, [g0, ga]])


def residual_equal_areas(ctx: ResidualContext, x):
    """Alternate residual form valid at equal areas; equals -residual/4 there.

    S(x) = x (g - 1/4) - 3 x g^2 / 4 + ∫_{g(x)}^{alpha} (1-y) g dy
         + g' ( g (x - 1/4) - 3 x^2 g / 4 + ∫_{x}^{alpha} (1-y) g dy ).
    """
    x = np.asarray(x, dtype=float)
    g = ctx.g(x)
    gp = ctx.g_prime(x)
    H = _weighted_antideriv(ctx.coefficients)
    h_alpha = _pv(ctx.alpha, H)
    tail_from_g = h_alpha - _pv(g, H)
    tail_from_x = h_alpha - _pv(x, H)
    first = x * (g - 0.25) - 0.75 * x * g * g + tail_from_g
    second = g * (x - 0.25) - 0.75 * x * x * g + tail_from_x
    return first + gp * second


@dataclass(frozen=True)
class RectangleBalance:
    """The two rectangle integrals balanced by an optimal equal-area curve."""

    p1: Point
    p2: Point
    upper_integral: float  # over [x1, x2] x [y1, 1]
    right_integral: float  # over [x2, 1] x [y2, y1]

    @property
    def defect(self) -> float:
        return abs(self.upper_integral - self.right_integral)


def rectangle_balance(region: Region, p1: Point, p2: Point,
                      tol: float = 1e-8, area_tol: float = 1e-6) -> RectangleBalance:
    """Check the area-transport balance between two boundary points.

    For an optimal equal-split curve, moving mass between boundary points
    cannot improve the objective, which forces
    ``∫_{Q1} (2 f1 - xy) = ∫_{Q3} (2 f1 - xy)`` with Q1 the strip above the
    left point and Q3 the strip right of the right point.
    """
    if region.area is None or abs(region.area - 0.5) > area_tol:
        raise RegionNotHalfError(f"region area {region.area} is not 1/2 within {area_tol}")
    (x1, y1), (x2, y2) = p1, p2
    if x1 > x2:
        raise PointsNotOrderedError(f"p1 must lie left of p2, got x1={x1} > x2={x2}")
    if y2 > y1 + 1e-12:
        raise PointsNotOrderedError(f"expected y1 >= y2 on a decreasing boundary")
    integrand = lambda x, y: 2.0 * region.f1(x, y) - x * y
    if x2 - x1 < 1e-15 or abs(y1 - y2) < 1e-15:
        upper = right = 0.0
        if x2 - x1 >= 1e-15 and y1 < 1.0:
            upper = integrate_2d(integrand, (x1, x2, y1, 1.0), tol).value
        if abs(y1 - y2) >= 1e-15 and x2 < 1.0:
            right = integrate_2d(integrand, (x2, 1.0, y2, y1), tol).value
        return RectangleBalance(p1, p2, upper, right)
    upper = integrate_2d(integrand, (x1, x2, y1, 1.0), tol).value if y1 < 1.0 else 0.0
    right = integrate_2d(integrand, (x2, 1.0, y2, y1), tol).value if x2 < 1.0 else 0.0
    return RectangleBalance(p1, p2, upper, right)


def residual_symmetry_defect(ctx: ResidualContext, x: float, sym_tol: float = 1e-6) -> float:
    """R(g(x)) g'(x) - R(x); identically zero on diagonal-symmetric curves.

    Follows from swapping the roles of the two coordinates in the residual:
    on a symmetric curve the two bracket terms trade places and
    g'(g(x)) = 1/g'(x).  Raises :class:`AsymmetricCurveError` when the
    composition g(g(.)) deviates from the identity by more than ``sym_tol``.
    """
    probe = np.linspace(0.0, ctx.alpha, 33)
    defect = np.max(np.abs(ctx.g(ctx.g(probe)) - probe))
    if defect > sym_tol:
        raise AsymmetricCurveError(f"curve symmetry defect {defect:.3e} exceeds {sym_tol:.1e}")
    gx = float(ctx.g(x))
    gp = float(ctx.g_prime(x))
    if gp == 0.0:
        raise ValueError("g'(x) must be nonzero")
    return float(residual_exact(ctx, gx) * gp - residual_exact(ctx, x))
