"""Gauss-Legendre rules and deterministic adaptive integration in 1D/2D.

Integrands passed to :func:`integrate_1d` and :func:`integrate_2d` must be
vectorized (accept and return numpy arrays).  Both adaptive routines are
pure: the same inputs always produce bit-identical results.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

# Newton iteration on Legendre polynomials is robust far beyond this, but a
# documented cap keeps requests sane.
MAX_RULE_ORDER = 1024

_MAX_DEPTH_1D = 30
_MAX_DEPTH_2D = 25
_MAX_PANELS_1D = 20_000
_MAX_PANELS_2D = 200_000

# Panel rule pairs: the coarse/fine orders compared for the error estimate.
_ORDER_LO_1D, _ORDER_HI_1D = 10, 20
_ORDER_LO_2D, _ORDER_HI_2D = 6, 12


class QuadratureError(ValueError):
    """Invalid quadrature request (bad interval or unsupported order)."""


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights of a Gauss-Legendre rule on [a, b]."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int
    a: float
    b: float

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(self.weights @ np.asarray(f(self.nodes), dtype=float))


@dataclass(frozen=True)
class IntegrationResult:
    """Adaptive integration outcome with an honest error estimate."""

    value: float
    error_estimate: float
    evaluations: int
    converged: bool


def _legendre_nodes_weights(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on [-1, 1] by Newton iteration on P_n."""
    k = np.arange(n)
    x = np.cos(np.pi * (k + 0.75) / (n + 0.5))

    def legendre_pair(x):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for m in range(2, n + 1):
            p0, p1 = p1, ((2 * m - 1) * x * p1 - (m - 1) * p0) / m
        return p1, p0  # P_n, P_{n-1}

    for _ in range(100):
        pn, pn1 = legendre_pair(x)
        dp = n * (x * pn - pn1) / (x * x - 1.0)
        dx = pn / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    pn, pn1 = legendre_pair(x)
    dp = n * (x * pn - pn1) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    return x[order], w[order]


_RULE_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _reference_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _RULE_CACHE:
        if n == 1:
            _RULE_CACHE[n] = (np.array([0.0]), np.array([2.0]))
        else:
            _RULE_CACHE[n] = _legendre_nodes_weights(n)
    return _RULE_CACHE[n]


def gauss_legendre(n: int, a: float, b: float) -> QuadratureRule:
    """Gauss-Legendre rule of order ``n`` on [a, b].

    Exact for polynomials of degree <= 2n - 1.  Raises
    :class:`QuadratureError` for a >= b or n outside [1, MAX_RULE_ORDER].
    """
    if not (1 <= n <= MAX_RULE_ORDER):
        raise QuadratureError(f"rule order must be in [1, {MAX_RULE_ORDER}], got {n}")
    if not (a < b):
        raise QuadratureError(f"invalid interval [{a}, {b}]: need a < b")
    x, w = _reference_rule(int(n))
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return QuadratureRule(nodes=mid + half * x, weights=half * w, order=int(n), a=float(a), b=float(b))


def _panel_eval_1d(f, a: float, b: float) -> tuple[float, float, int]:
    """(value, error estimate, evaluations) on one panel via order pair."""
    xl, wl = _reference_rule(_ORDER_LO_1D)
    xh, wh = _reference_rule(_ORDER_HI_1D)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    pts = np.concatenate([mid + half * xl, mid + half * xh])
    vals = np.asarray(f(pts), dtype=float)
    nlo = xl.size
    q_lo = half * float(wl @ vals[:nlo])
    q_hi = half * float(wh @ vals[nlo:])
    return q_hi, abs(q_hi - q_lo), pts.size


def integrate_1d(f, a: float, b: float, tol: float) -> IntegrationResult:
    """Adaptive Gauss-Legendre integration of ``f`` on [a, b].

    Bisects the panel with the largest error estimate until the summed
    estimate drops below ``tol``.  On depth/panel exhaustion the best value
    is returned with ``converged=False`` and the honest remaining estimate.
    """
    if not tol > 0:
        raise QuadratureError(f"tolerance must be positive, got {tol}")
    if a == b:
        return IntegrationResult(0.0, 0.0, 0, True)
    sign = 1.0
    if a > b:
        a, b, sign = b, a, -1.0

    val, err, n_eval = _panel_eval_1d(f, a, b)
    # heap entries: (-err, counter, a, b, depth, value, err)
    counter = 0
    heap = [(-err, counter, a, b, 0, val, err)]
    done: list[tuple[float, float, float, float]] = []  # (a, b, value, err)
    running_err = err
    converged = True
    while heap and running_err > tol:
        _, _, pa, pb, depth, pval, perr = heapq.heappop(heap)
        if depth >= _MAX_DEPTH_1D or len(heap) + len(done) >= _MAX_PANELS_1D:
            converged = False
            done.append((pa, pb, pval, perr))
            break
        running_err -= perr
        pm = 0.5 * (pa + pb)
        for ca, cb in ((pa, pm), (pm, pb)):
            cval, cerr, cn = _panel_eval_1d(f, ca, cb)
            n_eval += cn
            counter += 1
            heapq.heappush(heap, (-cerr, counter, ca, cb, depth + 1, cval, cerr))
            running_err += cerr
    for item in heap:
        done.append((item[2], item[3], item[5], item[6]))
    done.sort()
    value = math.fsum(v for _, _, v, _ in done)
    estimate = math.fsum(e for _, _, _, e in done)
    if estimate > tol:
        converged = False
    return IntegrationResult(sign * value, estimate, n_eval, converged)


def _panel_eval_2d(f, x0, x1, y0, y1) -> tuple[float, float, int]:
    xl, wl = _reference_rule(_ORDER_LO_2D)
    xh, wh = _reference_rule(_ORDER_HI_2D)
    mx, hx = 0.5 * (x0 + x1), 0.5 * (x1 - x0)
    my, hy = 0.5 * (y0 + y1), 0.5 * (y1 - y0)
    nlo, nhi = xl.size, xh.size
    X_lo, Y_lo = np.meshgrid(mx + hx * xl, my + hy * xl, indexing="ij")
    X_hi, Y_hi = np.meshgrid(mx + hx * xh, my + hy * xh, indexing="ij")
    xs = np.concatenate([X_lo.ravel(), X_hi.ravel()])
    ys = np.concatenate([Y_lo.ravel(), Y_hi.ravel()])
    vals = np.asarray(f(xs, ys), dtype=float)
    v_lo = vals[: nlo * nlo].reshape(nlo, nlo)
    v_hi = vals[nlo * nlo:].reshape(nhi, nhi)
    q_lo = hx * hy * float(wl @ v_lo @ wl)
    q_hi = hx * hy * float(wh @ v_hi @ wh)
    return q_hi, abs(q_hi - q_lo), xs.size


def integrate_2d(f, rect: tuple[float, float, float, float], tol: float) -> IntegrationResult:
    """Adaptive tensor Gauss-Legendre integration over a rectangle.

    ``rect`` is (x0, x1, y0, y1).  The worst panel is split along its
    longer axis until the summed error estimate drops below ``tol``.
    """
    if not tol > 0:
        raise QuadratureError(f"tolerance must be positive, got {tol}")
    x0, x1, y0, y1 = map(float, rect)
    if not (x0 < x1 and y0 < y1):
        raise QuadratureError(f"invalid rectangle {rect}")

    val, err, n_eval = _panel_eval_2d(f, x0, x1, y0, y1)
    # heap entries: (-err, counter, x0, x1, y0, y1, depth, value, err)
    counter = 0
    heap = [(-err, counter, x0, x1, y0, y1, 0, val, err)]
    done: list[tuple[float, float, float, float, float, float]] = []
    running_err = err
    converged = True
    while heap and running_err > tol:
        _, _, px0, px1, py0, py1, depth, pval, perr = heapq.heappop(heap)
        if depth >= _MAX_DEPTH_2D or len(heap) + len(done) >= _MAX_PANELS_2D:
            converged = False
            done.append((px0, py0, px1, py1, pval, perr))
            break
        running_err -= perr
        if (px1 - px0) >= (py1 - py0):
            pm = 0.5 * (px0 + px1)
            children = ((px0, pm, py0, py1), (pm, px1, py0, py1))
        else:
            pm = 0.5 * (py0 + py1)
            children = ((px0, px1, py0, pm), (px0, px1, pm, py1))
        for cx0, cx1, cy0, cy1 in children:
            cval, cerr, cn = _panel_eval_2d(f, cx0, cx1, cy0, cy1)
            n_eval += cn
            counter += 1
            heapq.heappush(heap, (-cerr, counter, cx0, cx1, cy0, cy1, depth + 1, cval, cerr))
            running_err += cerr
    for item in heap:
        done.append((item[2], item[4], item[3], item[5], item[7], item[8]))
    done.sort()
    value = math.fsum(d[4] for d in done)
    estimate = math.fsum(d[5] for d in done)
    if estimate > tol:
        converged = False
    return IntegrationResult(value, estimate, n_eval, converged)
