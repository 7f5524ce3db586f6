"""Two-region partitions of the unit square and their corner-box areas.

A partition is described by the region ``Omega`` below a monotone profile
(or by a half plane).  The central query is the corner-box area
``f1(x, y) = |Omega ∩ [0,x]×[0,y]|``; its complement share is
``f2 = x*y - f1``.  All queries are vectorized over numpy arrays.
"""

from __future__ import annotations

import abc
from typing import Callable, Sequence

import numpy as np

from .quadrature import integrate_1d

Point = tuple[float, float]

_BISECT_ITERS = 48  # interval shrinks by 2^-48; plenty below every tolerance used


class RegionError(ValueError):
    """Invalid region construction."""


class EmptyRegionError(RegionError):
    """The requested region has measure 0 or 1 inside the unit square."""


class NonMonotoneVerticesError(RegionError):
    """Polyline vertices do not describe a nonincreasing profile."""


# ---------------------------------------------------------------------------
# profiles


class Profile(abc.ABC):
    """Monotone nonincreasing boundary curve g on [0, x_end], zero beyond.

    Subclasses provide vectorized evaluation, the monotone inverse
    ``inverse(y) = inf{t >= 0 : g(t) <= y}`` and exact running integrals;
    ``corner_integral`` combines them into ``∫_0^x min(g(t), y) dt``.
    """

    x_end: float

    @abc.abstractmethod
    def eval(self, t: np.ndarray) -> np.ndarray: ...

    @abc.abstractmethod
    def inverse(self, y: np.ndarray) -> np.ndarray: ...

    @abc.abstractmethod
    def integral(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """∫_a^b g(t) dt with g treated as zero beyond x_end (needs a <= b)."""

    def total_integral(self) -> float:
        return float(np.asarray(self.integral(0.0, self.x_end)).ravel()[0])

    def corner_integral(self, x, y):
        scalar = np.ndim(x) == 0 and np.ndim(y) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        x, y = np.broadcast_arrays(x, y)
        t_star = self.inverse(y)
        m = np.minimum(x, t_star)
        out = y * m + self.integral(m, x)
        return float(out.ravel()[0]) if scalar else out


def _bisect_inverse(eval_fn, y, x_end: float) -> np.ndarray:
    """inf{t: g(t) <= y} for a nonincreasing vectorized g via bisection."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    lo = np.zeros_like(y)
    hi = np.full_like(y, x_end)
    g0 = eval_fn(lo)
    g_end = eval_fn(hi)
    at_zero = g0 <= y
    at_end = g_end > y
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        above = eval_fn(mid) > y
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    out = 0.5 * (lo + hi)
    out[at_zero] = 0.0
    out[at_end] = x_end
    return out


class PolynomialProfile(Profile):
    """Profile given by a polynomial sum(c[k] * t**k) on [0, x_end]."""

    def __init__(self, coefficients: Sequence[float], x_end: float, validate: bool = True):
        self.coefficients = np.asarray(coefficients, dtype=float)
        self.x_end = float(x_end)
        if not 0 < self.x_end:
            raise RegionError(f"x_end must be positive, got {x_end}")
        self._antideriv = np.polynomial.polynomial.polyint(self.coefficients)
        if validate:
            grid = np.linspace(0.0, self.x_end, 2049)
            vals = np.polynomial.polynomial.polyval(grid, self.coefficients)
            if np.any(np.diff(vals) > 1e-9) or vals.min() < -1e-9:
                raise RegionError("polynomial profile must be nonincreasing and nonnegative")

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        vals = np.polynomial.polynomial.polyval(t, self.coefficients)
        return np.where(t > self.x_end, 0.0, vals)

    def inverse(self, y):
        return _bisect_inverse(
            lambda t: np.polynomial.polynomial.polyval(t, self.coefficients), y, self.x_end
        )

    def integral(self, a, b):
        a = np.clip(np.asarray(a, dtype=float), 0.0, self.x_end)
        b = np.clip(np.asarray(b, dtype=float), 0.0, self.x_end)
        pv = np.polynomial.polynomial.polyval
        return pv(b, self._antideriv) - pv(a, self._antideriv)


class QuarterDiskProfile(Profile):
    """Circular arc profile g(t) = sqrt(r^2 - t^2) on [0, r]."""

    def __init__(self, r: float):
        if not 0 < r <= 1:
            raise RegionError(f"radius must satisfy 0 < r <= 1, got {r}")
        self.r = float(r)
        self.x_end = self.r

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        return np.sqrt(np.maximum(self.r * self.r - t * t, 0.0))

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        return np.sqrt(np.maximum(self.r * self.r - np.clip(y, 0.0, self.r) ** 2, 0.0))

    def _arc_cumulative(self, t):
        t = np.clip(np.asarray(t, dtype=float), 0.0, self.r)
        u = np.clip(t / self.r, 0.0, 1.0)
        return 0.5 * (t * np.sqrt(np.maximum(self.r * self.r - t * t, 0.0))
                      + self.r * self.r * np.arcsin(u))

    def integral(self, a, b):
        return self._arc_cumulative(b) - self._arc_cumulative(a)

    def total_integral(self) -> float:
        return float(np.pi * self.r * self.r / 4.0)


class PiecewiseLinearProfile(Profile):
    """Profile through vertices (x_i, y_i), x nondecreasing, y nonincreasing."""

    def __init__(self, vertices: Sequence[Point]):
        pts = [(float(x), float(y)) for x, y in vertices]
        if len(pts) < 2:
            raise NonMonotoneVerticesError("need at least two vertices")
        xs = np.array([p[0] for p in pts])
        ys = np.array([p[1] for p in pts])
        if xs[0] != 0.0:
            raise NonMonotoneVerticesError("profile must start on the y-axis (x0 = 0)")
        if ys[-1] != 0.0:
            raise NonMonotoneVerticesError("profile must end on the x-axis (y_last = 0)")
        if np.any(np.diff(xs) < 0) or np.any(np.diff(ys) > 0):
            raise NonMonotoneVerticesError("vertices must be nonincreasing left to right")
        if np.any((np.diff(xs) == 0) & (np.diff(ys) == 0)):
            raise NonMonotoneVerticesError("repeated vertex")
        if xs[-1] > 1.0 or ys[0] > 1.0 or xs.min() < 0 or ys.min() < 0:
            raise NonMonotoneVerticesError("vertices must stay inside the unit square")
        self.xs, self.ys = xs, ys
        self.x_end = float(xs[-1])
        # exact cumulative trapezoid areas at the vertices
        self._cum = np.concatenate([[0.0], np.cumsum(0.5 * (ys[1:] + ys[:-1]) * np.diff(xs))])

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        return np.interp(t, self.xs, self.ys)

    def inverse(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        j = np.searchsorted(-self.ys, -y, side="left")
        out = np.empty_like(y)
        out[j == 0] = 0.0
        out[j == len(self.ys)] = self.x_end
        inner = (j > 0) & (j < len(self.ys))
        ji = j[inner]
        y0, y1 = self.ys[ji - 1], self.ys[ji]
        x0, x1 = self.xs[ji - 1], self.xs[ji]
        frac = np.where(y0 > y1, (y0 - y[inner]) / np.where(y0 > y1, y0 - y1, 1.0), 1.0)
        out[inner] = x0 + frac * (x1 - x0)
        return out

    def _cumulative(self, t):
        t = np.clip(np.asarray(t, dtype=float), 0.0, self.x_end)
        i = np.clip(np.searchsorted(self.xs, t, side="right") - 1, 0, len(self.xs) - 2)
        return self._cum[i] + 0.5 * (self.ys[i] + self.eval(t)) * (t - self.xs[i])

    def integral(self, a, b):
        return self._cumulative(b) - self._cumulative(a)


class CallableProfile(Profile):
    """Profile from an arbitrary vectorized nonincreasing function.

    The corner integral locates the breakpoint g(t*) = y by bisection and
    integrates the two smooth pieces adaptively; this is the slow reference
    path, used to cross-check the closed-form profiles.
    """

    def __init__(self, func: Callable[[np.ndarray], np.ndarray], x_end: float,
                 quad_tol: float = 1e-10):
        self.func = func
        self.x_end = float(x_end)
        self.quad_tol = float(quad_tol)

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t > self.x_end, 0.0, np.asarray(self.func(t), dtype=float))

    def inverse(self, y):
        return _bisect_inverse(lambda t: np.asarray(self.func(t), dtype=float), y, self.x_end)

    def integral(self, a, b):
        a = np.atleast_1d(np.clip(np.asarray(a, dtype=float), 0.0, self.x_end))
        b = np.atleast_1d(np.clip(np.asarray(b, dtype=float), 0.0, self.x_end))
        out = np.empty_like(a)
        for i, (ai, bi) in enumerate(zip(a.ravel(), b.ravel())):
            out.ravel()[i] = integrate_1d(self.func, ai, bi, self.quad_tol).value
        return out


class InverseProfile(Profile):
    """Reflection of a strictly decreasing profile across the diagonal y = x."""

    def __init__(self, base: Profile):
        self.base = base
        self.x_end = float(np.atleast_1d(base.eval(np.array([0.0])))[0])

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t > self.x_end, 0.0, self.base.inverse(t))

    def inverse(self, y):
        # inf{t: base_inv(t) <= y} = base(y); the inverse profile's height at
        # zero is base.x_end, so clamp against that, not self.x_end.
        y = np.atleast_1d(np.asarray(y, dtype=float))
        out = self.base.eval(np.clip(y, 0.0, self.base.x_end))
        return np.where(y >= self.base.x_end, 0.0, np.where(y < 0, self.x_end, out))

    def integral(self, a, b):
        # ∫_a^b g_inv = [t*g_inv(t)]_a^b + ∫_{g_inv(b)}^{g_inv(a)} g
        a = np.clip(np.asarray(a, dtype=float), 0.0, self.x_end)
        b = np.clip(np.asarray(b, dtype=float), 0.0, self.x_end)
        ua = self.base.inverse(a)
        ub = self.base.inverse(b)
        return b * ub - a * ua + self.base.integral(ub, ua)


# ---------------------------------------------------------------------------
# half-plane clipping


def _box_halfplane_area(x, y, a: float, b: float, c):
    """Area of {(u,v) in [0,x]x[0,y] : a*u + b*v <= c}, exact and vectorized."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c = np.asarray(c, dtype=float)
    if a < 0:
        return _box_halfplane_area(x, y, -a, b, c - a * x)
    if b < 0:
        return _box_halfplane_area(x, y, a, -b, c - b * y)
    if a == 0 and b == 0:
        return np.where(c >= 0, x * y, 0.0)
    if a == 0:
        return x * np.clip(c / b, 0.0, y)
    if b == 0:
        return y * np.clip(c / a, 0.0, x)
    pos = lambda z: np.maximum(z, 0.0)
    return (pos(c) ** 2 - pos(c - a * x) ** 2 - pos(c - b * y) ** 2
            + pos(c - a * x - b * y) ** 2) / (2.0 * a * b)


# ---------------------------------------------------------------------------
# regions


class Region:
    """Two-region partition descriptor: Omega and its complement.

    ``area`` is the measure of Omega (``None`` for the unpartitioned
    baseline).  ``f1``/``f2``/``contains`` are vectorized over coordinates.
    """

    kind: str
    area: float | None

    def f1(self, x, y):
        raise NotImplementedError

    def f2(self, x, y):
        return np.asarray(x, dtype=float) * np.asarray(y, dtype=float) - self.f1(x, y)

    def contains(self, x, y):
        raise NotImplementedError

    def contains_point(self, pt: Point) -> bool:
        return bool(np.atleast_1d(self.contains(pt[0], pt[1]))[0])

    def reflected(self) -> "Region":
        raise NotImplementedError(f"reflection not available for kind {self.kind!r}")


class UnpartitionedRegion(Region):
    kind = "unpartitioned"
    area = None

    def f1(self, x, y):
        raise RegionError("corner-box area is undefined for the unpartitioned baseline")

    def contains(self, x, y):
        raise RegionError("membership is undefined for the unpartitioned baseline")

    def reflected(self):
        return self


class HalfPlaneRegion(Region):
    kind = "half_plane"

    def __init__(self, a: float, b: float, c: float):
        if a == 0 and b == 0:
            raise RegionError("a and b cannot both be zero")
        self.a, self.b, self.c = float(a), float(b), float(c)
        area = float(_box_halfplane_area(1.0, 1.0, self.a, self.b, self.c))
        if not 1e-12 < area < 1 - 1e-12:
            raise EmptyRegionError(
                f"half plane {a}x+{b}y<={c} does not split the unit square (area {area})"
            )
        self.area = area

    def f1(self, x, y):
        return _box_halfplane_area(x, y, self.a, self.b, self.c)

    def contains(self, x, y):
        return self.a * np.asarray(x, dtype=float) + self.b * np.asarray(y, dtype=float) <= self.c

    def reflected(self):
        return HalfPlaneRegion(self.b, self.a, self.c)


class SubgraphRegion(Region):
    """Omega = {(x, y): y <= g(x)} for a monotone profile g."""

    def __init__(self, profile: Profile, kind: str = "subgraph"):
        self.profile = profile
        self.kind = kind
        area = profile.total_integral()
        if not 0 < area < 1:
            raise EmptyRegionError(f"profile area {area} is not in (0, 1)")
        self.area = float(area)

    def f1(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self.profile.corner_integral(np.clip(x, 0.0, 1.0), np.clip(y, 0.0, 1.0))

    def contains(self, x, y):
        return np.asarray(y, dtype=float) <= self.profile.eval(np.asarray(x, dtype=float))

    def reflected(self):
        return SubgraphRegion(InverseProfile(self.profile), kind=self.kind)


def unpartitioned() -> Region:
    """The baseline with no partition (both sample points i.i.d. uniform)."""
    return UnpartitionedRegion()


def make_half_plane(a: float, b: float, c: float) -> Region:
    """Region {a*x + b*y <= c} clipped to the unit square."""
    return HalfPlaneRegion(a, b, c)


def make_quarter_disk(r: float) -> Region:
    """Quarter disk {x^2 + y^2 <= r^2} in the unit square, area pi*r^2/4."""
    region = SubgraphRegion(QuarterDiskProfile(r), kind="quarter_disk")
    return region


def make_polyline(vertices: Sequence[Point]) -> Region:
    """Subgraph of the piecewise-linear profile through ``vertices``."""
    return SubgraphRegion(PiecewiseLinearProfile(vertices), kind="polyline")


def make_subgraph(profile: Profile) -> Region:
    """Subgraph region of an arbitrary profile."""
    return SubgraphRegion(profile)


def f1(region: Region, x, y):
    """Corner-box area |Omega ∩ [0,x]×[0,y]| (module-level convenience)."""
    return region.f1(x, y)


def contains(region: Region, pt: Point) -> bool:
    """Whether the point lies in Omega (boundary counted as inside)."""
    return region.contains_point(pt)
