"""Collocation solver for the optimal two-region boundary curve.

Pipeline per area target p (one bisection level on the intercept alpha):

1. Gauss-Newton least squares on the raw-polynomial residual at 200
   Gauss-Legendre nodes with weighted endpoint constraints.
2. Monotonicity clamp near x = 0 and symmetrization about the diagonal.
3. A damped defect-correction sweep of the integral equation on a fine
   grid, seeded by the symmetrized curve (degree-10 polynomials cannot
   represent the steep right end of the exact curve on the whole interval,
   so stage 1 alone stalls at a large residual floor).
4. A refit of the gently-sloped left branch plus a final Gauss-Newton
   polish of the residual of the symmetrized curve itself, which is the
   object actually delivered.

The outer bisection adjusts alpha until the delivered curve's area matches
p.  All stages are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .discrepancy import DiscrepancyResult, expected_l2sq
from .integral_equation import ResidualContext, residual_vector
from .quadrature import gauss_legendre
from .regions import Profile, Region, SubgraphRegion

_pv = np.polynomial.polynomial.polyval
_pder = np.polynomial.polynomial.polyder
_pint = np.polynomial.polynomial.polyint
_pmul = np.polynomial.polynomial.polymul

_X0_BISECT_TOL = 1e-12
_INV_BISECT_ITERS = 48


class NoFixedPointError(ValueError):
    """The candidate polynomial does not cross the diagonal."""


class SolverError(RuntimeError):
    """Unrecoverable solver failure (bracketing or inner divergence)."""


@dataclass(frozen=True)
class SolverConfig:
    degree: int = 10
    n_nodes: int = 200
    constraint_weight: float = 1e3
    gn_max_iter: int = 100
    gn_step_tol: float = 1e-10
    area_tol: float = 1e-6
    quad_tol_residual: float = 1e-9
    quad_tol_disc: float = 1e-6
    clamp_window: float = 0.1
    area_on_raw_polynomial: bool = False  # alternative reading of the area bisection

    def __post_init__(self):
        if not 2 <= self.degree <= 10:
            raise ValueError(f"degree must be in [2, 10], got {self.degree}")
        if self.n_nodes < 10:
            raise ValueError(f"n_nodes must be >= 10, got {self.n_nodes}")
        for name in ("constraint_weight", "gn_step_tol", "area_tol",
                     "quad_tol_residual", "quad_tol_disc", "clamp_window"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.gn_max_iter < 1:
            raise ValueError("gn_max_iter must be >= 1")


# ---------------------------------------------------------------------------
# symmetrized curve


class SymmetrizedCurve:
    """Piecewise boundary: plateau, base polynomial, mirrored inverse branch.

    evaluate(x) equals y_max on [0, x_max], the base polynomial on
    (x_max, x0], its functional inverse on (x0, y_max] and zero beyond, so
    the graph is symmetric about the diagonal by construction.
    """

    def __init__(self, coefficients: Sequence[float], alpha: float, x0: float,
                 x_max: float, y_max: float):
        self.coefficients = np.asarray(coefficients, dtype=float)
        self.alpha = float(alpha)
        self.x0 = float(x0)
        self.x_max = float(x_max)
        self.y_max = float(y_max)
        self._deriv = _pder(self.coefficients)
        self._antideriv = _pint(self.coefficients)

    @property
    def x_intercept(self) -> float:
        """Where the symmetrized profile reaches zero (= y_max)."""
        return self.y_max

    def _g(self, x):
        return _pv(np.asarray(x, dtype=float), self.coefficients)

    def _g_prime(self, x):
        return _pv(np.asarray(x, dtype=float), self._deriv)

    def g_inverse(self, y):
        """Inverse of the base polynomial on [x_max, x0], vectorized."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        lo = np.full_like(y, self.x_max)
        hi = np.full_like(y, self.x0)
        for _ in range(_INV_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            above = self._g(mid) > y
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        return 0.5 * (lo + hi)

    def evaluate(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        plateau = x <= self.x_max
        out[plateau] = self.y_max
        base = (x > self.x_max) & (x <= self.x0)
        out[base] = self._g(x[base])
        mirror = (x > self.x0) & (x <= self.y_max)
        out[mirror] = self.g_inverse(x[mirror])
        return out

    def derivative(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        base = (x > self.x_max) & (x <= self.x0)
        out[base] = self._g_prime(x[base])
        mirror = (x > self.x0) & (x <= self.y_max)
        u = self.g_inverse(x[mirror])
        out[mirror] = 1.0 / self._g_prime(u)
        return out

    def cumulative(self, t):
        """∫_0^t of the symmetrized profile, exact per piece."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        t = np.clip(t, 0.0, self.y_max)
        pa = self._antideriv
        c_x0 = self.x_max * self.y_max + _pv(self.x0, pa) - _pv(self.x_max, pa)
        out = np.where(t <= self.x_max, t * self.y_max, 0.0)
        base = (t > self.x_max) & (t <= self.x0)
        tb = np.where(base, t, self.x0)
        out = np.where(
            base, self.x_max * self.y_max + _pv(tb, pa) - _pv(self.x_max, pa), out
        )
        mirror = t > self.x0
        tm = np.where(mirror, t, self.x0)
        u = self.g_inverse(tm)
        # ∫_{x0}^{t} g_inv = t g_inv(t) - x0^2 + ∫_{g_inv(t)}^{x0} g
        mirror_part = tm * u - self.x0 * self.x0 + (_pv(self.x0, pa) - _pv(u, pa))
        out = np.where(mirror, c_x0 + mirror_part, out)
        return out

    def area(self) -> float:
        """Measure of the symmetric region: 2 ∫_0^{x0} g_sym - x0^2."""
        pa = self._antideriv
        under_left = self.x_max * self.y_max + _pv(self.x0, pa) - _pv(self.x_max, pa)
        return float(2.0 * under_left - self.x0 * self.x0)

    def weighted_tail(self, t):
        """∫_t^{y_max} (1 - y) g_sym(y) dy, exact per piece."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        t = np.clip(t, 0.0, self.y_max)
        c = self.coefficients
        # antiderivative of (1 - y) g(y)
        h = np.concatenate([c, [0.0]]) - np.concatenate([[0.0], c])
        H = _pint(h)
        # antiderivative of (1 - g(u)) u g'(u): the mirrored-branch integrand
        one_minus_g = -c.copy()
        one_minus_g[0] += 1.0
        Q = _pint(_pmul(_pmul(one_minus_g, np.array([0.0, 1.0])), self._deriv))

        # plateau piece: y_max * ∫_t^{x_max} (1 - y) dy for t < x_max
        tp = np.minimum(t, self.x_max)
        plateau = self.y_max * ((self.x_max - tp) - 0.5 * (self.x_max ** 2 - tp ** 2))
        # polynomial piece on [max(t, x_max), x0]
        tb = np.clip(t, self.x_max, self.x0)
        poly_piece = _pv(self.x0, H) - _pv(tb, H)
        # mirrored piece on [max(t, x0), y_max]
        tm = np.maximum(t, self.x0)
        u = self.g_inverse(tm)
        mirror_piece = _pv(self.x_max, Q) - _pv(u, Q)
        return plateau + poly_piece + mirror_piece

    def profile(self) -> "SymmetrizedProfile":
        return SymmetrizedProfile(self)

    def region(self) -> Region:
        return SubgraphRegion(self.profile(), kind="symmetrized_curve")


class SymmetrizedProfile(Profile):
    """Profile view of a SymmetrizedCurve; its own inverse by symmetry."""

    def __init__(self, curve: SymmetrizedCurve):
        self.curve = curve
        self.x_end = curve.y_max

    def eval(self, t):
        return self.curve.evaluate(t)

    def inverse(self, y):
        return self.curve.evaluate(y)

    def integral(self, a, b):
        return self.curve.cumulative(b) - self.curve.cumulative(a)

    def total_integral(self) -> float:
        return self.curve.area()


# ---------------------------------------------------------------------------
# residual of the delivered curve


def _free_node_mask(curve: SymmetrizedCurve, nodes: np.ndarray) -> np.ndarray:
    """Nodes where the monotonicity constraint is inactive.

    Inside the clamped plateau and its mirror strip the optimality equation
    does not apply (the constraint carries the curve there).
    """
    if curve.x_max <= 0.0:
        return np.ones(nodes.size, dtype=bool)
    mirror_edge = float(curve._g(min(curve.x_max + 1e-3, curve.x0)))
    return (nodes >= curve.x_max + 1e-3) & (nodes <= mirror_edge)


def curve_residual_vector(curve: SymmetrizedCurve, p: float, n_nodes: int = 200,
                          free_only: bool = True) -> np.ndarray:
    """Optimality residual of the symmetrized curve at collocation nodes.

    Uses the curve's own intercept as the upper integration limit and the
    exact piecewise integrals.  With ``free_only`` (default) the nodes
    falling in the clamped plateau and its mirror strip are dropped: the
    equation only applies where the monotonicity constraint is inactive.
    """
    top = curve.y_max
    nodes = gauss_legendre(n_nodes, 0.0, top).nodes
    if free_only:
        nodes = nodes[_free_node_mask(curve, nodes)]
    g = curve.evaluate(nodes)
    gp = curve.derivative(nodes)
    tail_g = curve.weighted_tail(g)
    tail_x = curve.weighted_tail(nodes)
    a_term = (1 - 2 * p - 4 * nodes * g) * (1 - g) + (4 * p - 1) * nodes * (1 - g * g) - 4 * tail_g
    b_term = (1 - 2 * p - 4 * nodes * g) * (1 - nodes) + (4 * p - 1) * g * (1 - nodes ** 2) - 4 * tail_x
    return a_term + gp * b_term


def curve_residual_rms(curve: SymmetrizedCurve, p: float, n_nodes: int = 200) -> float:
    r = curve_residual_vector(curve, p, n_nodes)
    return float(np.sqrt(np.mean(r * r)))


# ---------------------------------------------------------------------------
# stage 1: Gauss-Newton on the raw-polynomial collocation


@dataclass(frozen=True)
class FixedAlphaResult:
    coefficients: np.ndarray
    residual_rms: float
    iterations: int
    converged: bool


def arc_init(alpha: float, degree: int) -> np.ndarray:
    """Polynomial least-squares fit of the circular arc sqrt(alpha^2 - x^2).

    Endpoint conditions g(0) = alpha and g(alpha) = 0 are restored exactly
    after the fit.  Used as the default Gauss-Newton start: the straight
    line lies in the basin of an inward-sagging spurious branch for large
    area targets, the arc does not.
    """
    xs = 0.5 * alpha * (1.0 - np.cos(np.linspace(0.0, np.pi, 256)))
    ys = np.sqrt(np.maximum(alpha * alpha - xs * xs, 0.0))
    cheb = np.polynomial.chebyshev.Chebyshev.fit(xs, ys, degree, domain=[0.0, alpha])
    coeffs = cheb.convert(kind=np.polynomial.polynomial.Polynomial).coef
    coeffs = np.concatenate([coeffs, np.zeros(degree + 1 - coeffs.size)])
    coeffs[0] += alpha - _pv(0.0, coeffs)
    coeffs[1] -= _pv(alpha, coeffs) / alpha
    return coeffs


def _gauss_newton(residual_fn: Callable[[np.ndarray], np.ndarray], c0: np.ndarray,
                  max_iter: int, step_tol: float, fd_step: float = 1e-7,
                  rcond: float = 1e-10, halvings: int = 20,
                  rescue: bool = False) -> tuple[np.ndarray, int, bool]:
    """Damped Gauss-Newton with column-scaled least-squares steps."""
    c = np.asarray(c0, dtype=float).copy()
    f = residual_fn(c)
    ssq = float(f @ f)
    iterations = 0
    converged = True
    for _ in range(max_iter):
        jac = np.empty((f.size, c.size))
        for k in range(c.size):
            ck = c.copy()
            ck[k] += fd_step
            jac[:, k] = (residual_fn(ck) - f) / fd_step
        scale = np.linalg.norm(jac, axis=0)
        scale[scale == 0.0] = 1.0
        step_scaled, *_ = np.linalg.lstsq(jac / scale, -f, rcond=rcond)
        step = step_scaled / scale
        step_norm = float(np.linalg.norm(step))
        if step_norm <= step_tol:
            break
        def try_step(candidate_step):
            trial = c + candidate_step
            try:
                f_trial = residual_fn(trial)
                ssq_trial = float(f_trial @ f_trial)
            except (ValueError, FloatingPointError):
                return None  # trial left the valid curve family
            if np.isfinite(ssq_trial) and ssq_trial < ssq:
                return trial, f_trial, ssq_trial
            return None

        t = 1.0
        accepted = None
        for _ in range(halvings + 1):
            accepted = try_step(t * step)
            if accepted is not None:
                break
            t *= 0.5
        if accepted is None and rescue:
            # rescue ladder: retry with diagonally damped steps before
            # declaring a stall
            jac_s = jac / scale
            normal = jac_s.T @ jac_s
            grad = jac_s.T @ f
            diag = np.diag(np.diag(normal))
            for lam in (1e-4, 1e-2, 1.0, 1e2):
                try:
                    damped = np.linalg.solve(normal + lam * diag + 1e-14 * np.eye(c.size), -grad)
                except np.linalg.LinAlgError:
                    continue
                accepted = try_step(damped / scale)
                if accepted is not None:
                    break
        if accepted is None:
            # stalled: a stationary point if the proposed step was already
            # small relative to the iterate, a divergence otherwise
            converged = step_norm <= math.sqrt(step_tol) * (1.0 + float(np.linalg.norm(c)))
            break
        taken_norm = float(np.linalg.norm(accepted[0] - c))
        c, f, ssq = accepted
        iterations += 1
        if taken_norm <= step_tol:
            break
    return c, iterations, converged


def solve_fixed_alpha(alpha: float, p: float, cfg: SolverConfig | None = None,
                      init: np.ndarray | None = None) -> FixedAlphaResult:
    """Least-squares collocation of the raw polynomial at fixed alpha.

    Minimizes the sum of squared node residuals plus
    ``constraint_weight^2 [(g(0)-alpha)^2 + g(alpha)^2]``; returns the
    unweighted node-residual rms of the final iterate.
    """
    cfg = cfg or SolverConfig()
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must be in (0, 1), got {p}")
    rule = gauss_legendre(cfg.n_nodes, 0.0, alpha)
    weight = cfg.constraint_weight

    def weighted_residual(c):
        vec = residual_vector(ResidualContext(c, alpha, p), rule)
        vec[-2:] *= weight
        return vec

    c0 = arc_init(alpha, cfg.degree) if init is None else np.asarray(init, dtype=float).copy()
    c, iterations, converged = _gauss_newton(
        weighted_residual, c0, cfg.gn_max_iter, cfg.gn_step_tol
    )
    node_res = residual_vector(ResidualContext(c, alpha, p), rule)[:-2]
    rms = float(np.sqrt(np.mean(node_res * node_res)))
    return FixedAlphaResult(c, rms, iterations, converged)


# ---------------------------------------------------------------------------
# stage 2: clamp and symmetrize


def clamp_monotone(coefficients: Sequence[float], alpha: float,
                   cfg: SolverConfig | None = None) -> tuple[float, float]:
    """Plateau (x_max, y_max) replacing a non-monotone start of the curve.

    Scans the clamp window on a fine grid for the maximizer of g and
    refines it by bisection on g'; x_max = 0 when g is already decreasing
    from the left edge.
    """
    cfg = cfg or SolverConfig()
    coeffs = np.asarray(coefficients, dtype=float)
    window = min(cfg.clamp_window, alpha)
    grid = np.linspace(0.0, window, 10_001)
    values = _pv(grid, coeffs)
    imax = int(np.argmax(values))
    if imax == 0:
        return 0.0, float(_pv(0.0, coeffs))
    deriv = _pder(coeffs)
    lo = grid[imax - 1]
    hi = grid[min(imax + 1, grid.size - 1)]
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if _pv(mid, deriv) > 0.0:
            lo = mid
        else:
            hi = mid
    x_max = 0.5 * (lo + hi)
    return float(x_max), float(_pv(x_max, coeffs))


def symmetrize(coefficients: Sequence[float], alpha: float,
               clamp: tuple[float, float] | None = None) -> SymmetrizedCurve:
    """Build the diagonal-symmetric curve from the base polynomial.

    The crossing x0 with the diagonal is located by bisection (first sign
    change of g(x) - x right of the plateau).
    """
    coeffs = np.asarray(coefficients, dtype=float)
    x_max, y_max = clamp if clamp is not None else (0.0, float(_pv(0.0, coeffs)))
    grid = np.linspace(x_max, alpha, 2049)
    gap = _pv(grid, coeffs) - grid
    if gap[0] <= 0.0:
        raise NoFixedPointError("curve starts at or below the diagonal")
    below = np.nonzero(gap <= 0.0)[0]
    if below.size == 0:
        raise NoFixedPointError("curve does not cross the diagonal")
    lo = grid[below[0] - 1]
    hi = grid[below[0]]
    while hi - lo > _X0_BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if _pv(mid, coeffs) - mid > 0.0:
            lo = mid
        else:
            hi = mid
    x0 = 0.5 * (lo + hi)
    return SymmetrizedCurve(coeffs, alpha, x0, x_max, y_max)


# ---------------------------------------------------------------------------
# stage 3: defect correction of the symmetrized curve on a fine grid


def _ode_slope(g: np.ndarray, xs: np.ndarray, alpha: float, p: float) -> np.ndarray:
    """Slope field -A/B of the optimality equation for the current iterate."""
    integrand = (1.0 - xs) * g
    seg = 0.5 * (integrand[1:] + integrand[:-1]) * np.diff(xs)
    tail = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
    tail_at_g = np.interp(np.clip(g, 0.0, alpha), xs, tail)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        a_term = ((1 - 2 * p - 4 * xs * g) * (1 - g)
                  + (4 * p - 1) * xs * (1 - g * g) - 4 * tail_at_g)
        b_term = ((1 - 2 * p - 4 * xs * g) * (1 - xs)
                  + (4 * p - 1) * g * (1 - xs ** 2) - 4 * tail)
        slope = -a_term / b_term
    # b vanishes at x = alpha when alpha = 1 or p = 1/2; bridge isolated
    # singular points from their neighbours
    bad = ~np.isfinite(slope) | (np.abs(b_term) < 1e-9)
    if bad.mean() > 0.05:
        raise SolverError("defect correction hit a singular slope region")
    if bad.any():
        good = ~bad
        slope = np.where(bad, np.interp(xs, xs[good], slope[good]), slope)
    return slope


def _sweep_update(g: np.ndarray, xs: np.ndarray, alpha: float, p: float,
                  damping: float) -> np.ndarray:
    """One damped sweep: integrate the slope field from g(0) = alpha.

    For p >= 1/2 the steep branch right of the diagonal is replaced with
    the exact mirror of the gentle branch (the slope field is singular at
    the intercept there); for p < 1/2 the curve rises near zero and folds
    under reflection, so the plain integrated update is used instead.
    """
    slope = _ode_slope(g, xs, alpha, p)
    update = alpha + np.concatenate(
        [[0.0], np.cumsum(0.5 * (slope[1:] + slope[:-1]) * np.diff(xs))]
    )
    if p >= 0.5:
        gap = update - xs
        idx = int(np.argmax(gap <= 0.0))
        if idx > 0:
            x0u = xs[idx - 1] + gap[idx - 1] * (xs[idx] - xs[idx - 1]) / (gap[idx - 1] - gap[idx])
            keep = xs <= x0u
            u_vals = update[keep]
            if u_vals.size >= 2 and np.all(np.diff(u_vals) < 0):
                mirrored = np.interp(xs[~keep], u_vals[::-1], xs[keep][::-1])
                update = np.concatenate([u_vals, mirrored])
    return (1.0 - damping) * g + damping * update


def _defect_correction(seed: Callable[[np.ndarray], np.ndarray], alpha: float, p: float,
                       n_grid: int = 3001, max_sweeps: int = 400, damping: float = 0.35,
                       tol: float = 5e-13, anderson_depth: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """Fixed point of the integral equation on a fine grid.

    Damped sweeps of the slope field with safeguarded Anderson mixing; the
    result is independent of the seed within the basin, which keeps the
    outer area bisection numerically smooth.
    """
    xs = 0.5 * alpha * (1.0 - np.cos(np.linspace(0.0, np.pi, n_grid)))
    g = np.clip(np.asarray(seed(xs), dtype=float), 0.0, 1.0)

    def step(v: np.ndarray) -> np.ndarray:
        out = _sweep_update(v, xs, alpha, p, damping)
        if not np.all(np.isfinite(out)) or float(np.max(np.abs(out))) > 4.0:
            raise SolverError("defect correction diverged")
        return out

    g_mapped = step(g)
    hist_g: list[np.ndarray] = []
    hist_r: list[np.ndarray] = []
    delta = math.inf
    for _ in range(max_sweeps):
        r = g_mapped - g
        delta = float(np.max(np.abs(r)))
        if delta < tol:
            g = g_mapped
            break
        hist_g.append(g_mapped.copy())
        hist_r.append(r.copy())
        if len(hist_g) > anderson_depth + 1:
            hist_g.pop(0)
            hist_r.pop(0)
        accepted = False
        if len(hist_g) >= 2:
            d_r = np.column_stack([hist_r[i + 1] - hist_r[i] for i in range(len(hist_r) - 1)])
            d_g = np.column_stack([hist_g[i + 1] - hist_g[i] for i in range(len(hist_g) - 1)])
            gamma, *_ = np.linalg.lstsq(d_r, r, rcond=None)
            candidate = g_mapped - d_g @ gamma
            if np.all(np.isfinite(candidate)) and float(np.linalg.norm(gamma)) < 50.0:
                try:
                    cand_mapped = step(candidate)
                except SolverError:
                    cand_mapped = None
                if cand_mapped is not None and float(np.max(np.abs(cand_mapped - candidate))) < delta:
                    g, g_mapped = candidate, cand_mapped
                    accepted = True
        if not accepted:
            g = g_mapped
            g_mapped = step(g)
    if delta > 1e-9:
        raise SolverError(f"defect correction stalled (residual change {delta:.1e})")
    return xs, g


def _fit_shallow_branch(xs: np.ndarray, gs: np.ndarray, degree: int,
                        margin: float = 0.05) -> np.ndarray:
    """Degree-bounded polynomial fit of the curve left of the diagonal.

    Only [0, x0 + margin] is fitted: that branch is gently sloped and fits
    to high accuracy, while the mirrored steep branch is reproduced through
    the symmetrization instead of the polynomial.  The crossing x0 is
    interpolated so the fit window varies smoothly with the curve.
    """
    gap = gs - xs
    below = np.nonzero(gap <= 0.0)[0]
    if below.size == 0 or below[0] == 0:
        raise SolverError("refined curve does not cross the diagonal")
    i = below[0]
    x0 = xs[i - 1] + gap[i - 1] * (xs[i] - xs[i - 1]) / (gap[i - 1] - gap[i])
    hi = min(float(x0) + margin, float(xs[-1]))
    mask = xs <= hi
    cheb = np.polynomial.chebyshev.Chebyshev.fit(xs[mask], gs[mask], degree, domain=[0.0, hi])
    coeffs = cheb.convert(kind=np.polynomial.polynomial.Polynomial).coef
    return np.concatenate([coeffs, np.zeros(max(0, degree + 1 - coeffs.size))])


def _polish_symmetrized(coeffs: np.ndarray, alpha: float, p: float,
                        cfg: SolverConfig) -> SymmetrizedCurve:
    """Final Gauss-Newton pass on the residual of the symmetrized curve."""

    def build(c):
        clamp = clamp_monotone(c, alpha, cfg)
        return symmetrize(c, alpha, clamp)

    # freeze the free-node index set from the seed so the residual vector
    # keeps a fixed length while the clamp point moves during iteration
    seed_curve = build(coeffs)
    seed_nodes = gauss_legendre(cfg.n_nodes, 0.0, seed_curve.y_max).nodes
    keep = _free_node_mask(seed_curve, seed_nodes)

    def residual_fn(c):
        curve = build(c)
        r = curve_residual_vector(curve, p, cfg.n_nodes, free_only=False)[keep]
        anchor = cfg.constraint_weight * (curve.y_max - alpha)
        return np.concatenate([r, [anchor]])

    c, _, _ = _gauss_newton(residual_fn, coeffs, max_iter=80, step_tol=1e-12, rescue=True)
    return build(c)


# ---------------------------------------------------------------------------
# outer solve


@dataclass(frozen=True)
class SolveOutcome:
    curve: SymmetrizedCurve | None
    p_target: float
    p_achieved: float
    alpha: float
    residual_rms: float
    discrepancy: DiscrepancyResult | None
    iterations: int
    converged: bool
    message: str = ""


P_MIN, P_MAX = 0.3, 0.8


class _InnerSolver:
    """Solves one alpha; caches stage-1 coefficients and refined curves."""

    def __init__(self, p: float, cfg: SolverConfig):
        self.p = p
        self.cfg = cfg
        self.stage1: dict[float, np.ndarray] = {}
        self.refined: dict[float, SymmetrizedCurve] = {}
        self.iterations = 0

    def _warm_init(self, alpha: float) -> np.ndarray | None:
        if not self.stage1:
            return None
        nearest = min(self.stage1, key=lambda a: (abs(a - alpha), a))
        coeffs = self.stage1[nearest].copy()
        # rescale so both endpoint constraints stay exactly satisfied
        ratio = nearest / alpha
        coeffs *= ratio ** (np.arange(coeffs.size) - 1)
        return coeffs

    def _refine_seed(self, alpha: float, stage1_curve: SymmetrizedCurve):
        if self.refined:
            nearest = min(self.refined, key=lambda a: (abs(a - alpha), a))
            if abs(nearest - alpha) <= 0.1:
                return self.refined[nearest].evaluate
        if stage1_curve.x_max == 0.0 and self.p >= 0.5:
            return stage1_curve.evaluate
        # clamped or rising stage-1 output seeds the sweep poorly; the plain
        # circular arc is a pure function of alpha inside the main basin
        return lambda xs: np.sqrt(np.maximum(alpha * alpha - xs * xs, 0.0))

    def solve(self, alpha: float) -> tuple[SymmetrizedCurve, bool]:
        """Returns (curve, refined); refined=False marks a stage-1 fallback."""
        cfg = self.cfg
        fixed = solve_fixed_alpha(alpha, self.p, cfg, init=self._warm_init(alpha))
        if not fixed.converged:
            fixed = solve_fixed_alpha(alpha, self.p, cfg, init=None)
        self.stage1[alpha] = fixed.coefficients
        self.iterations += fixed.iterations
        clamp = clamp_monotone(fixed.coefficients, alpha, cfg)
        curve = symmetrize(fixed.coefficients, alpha, clamp)
        try:
            xs, gs = _defect_correction(self._refine_seed(alpha, curve), alpha, self.p)
            coeffs = _fit_shallow_branch(xs, gs, cfg.degree)
            # chain the polish seed through neighbouring solutions so that
            # adjacent probes land in the same least-squares stall basin
            if self.refined:
                nearest = min(self.refined, key=lambda a: (abs(a - alpha), a))
                if abs(nearest - alpha) <= 2e-3:
                    coeffs = self.refined[nearest].coefficients.copy()
            polished = _polish_symmetrized(coeffs, alpha, self.p, cfg)
            self.refined[alpha] = polished
            return polished, True
        except (SolverError, NoFixedPointError):
            # far from the self-consistent alpha the refinement can fail;
            # the stage-1 curve still provides a usable area probe
            return curve, False

    def area(self, curve: SymmetrizedCurve, alpha: float) -> float:
        if self.cfg.area_on_raw_polynomial:
            anti = _pint(self.stage1[alpha])
            return float(_pv(alpha, anti) - _pv(0.0, anti))
        return curve.area()


def solve_for_p(p: float, cfg: SolverConfig | None = None) -> SolveOutcome:
    """Solve the variational problem at area split p.

    Bisects the intercept alpha inside [max(p, 0.05), 1] until the
    symmetrized clamped curve's area matches p within ``cfg.area_tol``,
    then evaluates the expected squared discrepancy of the partition.
    """
    cfg = cfg or SolverConfig()
    if not P_MIN <= p <= P_MAX:
        raise ValueError(f"p must be in [{P_MIN}, {P_MAX}], got {p}")
    inner = _InnerSolver(p, cfg)

    def evaluate(alpha: float) -> tuple[SymmetrizedCurve, float, bool]:
        curve, refined = inner.solve(alpha)
        return curve, inner.area(curve, alpha), refined

    lo, hi = max(p, 0.05), 1.0
    try:
        _, area_lo, _ = evaluate(lo)
        _, area_hi, _ = evaluate(hi)
        if not (area_lo < p < area_hi):
            bracket = _scan_bracket(evaluate, p)
            if bracket is None:
                return SolveOutcome(None, p, math.nan, math.nan, math.nan, None,
                                    inner.iterations, False, "bracket-failure")
            (lo, area_lo), (hi, area_hi) = bracket
        best: tuple[float, SymmetrizedCurve, float] | None = None
        best_refined: tuple[float, SymmetrizedCurve, float] | None = None
        f_lo, f_hi = area_lo - p, area_hi - p
        side = 0
        for _ in range(120):
            # Illinois secant proposal, clipped inside the bracket; plain
            # bisection whenever the secant degenerates
            if abs(f_hi - f_lo) > 1e-30:
                mid = hi - f_hi * (hi - lo) / (f_hi - f_lo)
                span = hi - lo
                mid = min(max(mid, lo + 0.02 * span), hi - 0.02 * span)
            else:
                mid = 0.5 * (lo + hi)
            # prefer a refined probe: a stage-1 fallback area is biased and
            # would poison the bracket near the root
            probe = None
            for candidate in (mid, lo + 0.5 * (hi - lo), lo + 0.382 * (hi - lo)):
                curve, area, refined = evaluate(candidate)
                if refined:
                    probe = (candidate, curve, area, True)
                    break
                if probe is None:
                    probe = (candidate, curve, area, False)
            mid, curve, area, refined = probe
            if best is None or abs(area - p) < abs(best[2] - p):
                best = (mid, curve, area)
            if refined and (best_refined is None or abs(area - p) < abs(best_refined[2] - p)):
                best_refined = (mid, curve, area)
            if abs(area - p) <= cfg.area_tol:
                break
            if area < p:
                lo, f_lo = mid, area - p
                if side == -1:
                    f_hi *= 0.5
                side = -1
            else:
                hi, f_hi = mid, area - p
                if side == 1:
                    f_lo *= 0.5
                side = 1
            if hi - lo < 1e-13:
                break
        chosen = best_refined if best_refined is not None else best
        assert chosen is not None
        alpha, curve, area = chosen
    except SolverError as exc:
        return SolveOutcome(None, p, math.nan, math.nan, math.nan, None,
                            inner.iterations, False, str(exc))
    converged = abs(area - p) <= cfg.area_tol
    rms = curve_residual_rms(curve, p, cfg.n_nodes)
    disc = expected_l2sq(curve.region(), cfg.quad_tol_disc)
    return SolveOutcome(curve, p, area, alpha, rms, disc, inner.iterations,
                        converged and disc.converged,
                        "" if converged else "area tolerance not met")


def _scan_bracket(evaluate, p: float, n_scan: int = 16):
    """Fallback bracket search over a fixed alpha grid."""
    alphas = np.linspace(0.05, 1.0, n_scan)
    prev = None
    for alpha in alphas:
        try:
            _, area, _ = evaluate(float(alpha))
        except SolverError:
            prev = None
            continue
        if prev is not None and prev[1] < p < area:
            return prev, (float(alpha), area)
        prev = (float(alpha), area)
    return None


def sweep(p_values: Sequence[float], cfg: SolverConfig | None = None) -> list[SolveOutcome]:
    """solve_for_p over a grid; failures are recorded per row."""
    cfg = cfg or SolverConfig()
    rows = []
    for p in p_values:
        try:
            rows.append(solve_for_p(float(p), cfg))
        except (ValueError, SolverError) as exc:
            rows.append(SolveOutcome(None, float(p), math.nan, math.nan, math.nan,
                                     None, 0, False, str(exc)))
    return rows


def argmin_row(rows: Sequence[SolveOutcome]) -> SolveOutcome | None:
    """Converged row with the smallest discrepancy, None if all failed."""
    ok = [r for r in rows if r.converged and r.discrepancy is not None]
    if not ok:
        return None
    return min(ok, key=lambda r: r.discrepancy.value)


# ---------------------------------------------------------------------------
# stationarity diagnostics


def stationarity_check(outcome: SolveOutcome, n_directions: int = 8, h: float = 1e-4,
                       seed: int = 0, quad_tol: float = 1e-7) -> float:
    """Max |directional derivative| of the objective at the solved curve.

    Random coefficient directions are projected onto the tangent space of
    the area constraint; the objective is differenced centrally with step
    ``h`` through the full clamp+symmetrize pipeline.
    """
    if outcome.curve is None:
        raise ValueError("outcome has no curve")
    curve = outcome.curve
    alpha = curve.alpha
    cfg = SolverConfig()

    def build(c):
        clamp = clamp_monotone(c, alpha, cfg)
        return symmetrize(c, alpha, clamp)

    def objective(c) -> float:
        return expected_l2sq(build(c).region(), quad_tol).value

    def area_of(c) -> float:
        return build(c).area()

    c0 = curve.coefficients
    base_area = area_of(c0)
    grad_area = np.empty(c0.size)
    fd = 1e-7
    for k in range(c0.size):
        ck = c0.copy()
        ck[k] += fd
        grad_area[k] = (area_of(ck) - base_area) / fd
    norm_sq = float(grad_area @ grad_area)

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_directions):
        direction = rng.standard_normal(c0.size)
        if norm_sq > 0.0:
            direction -= (direction @ grad_area) / norm_sq * grad_area
        norm = float(np.linalg.norm(direction))
        if norm == 0.0:
            continue
        direction /= norm
        j_plus = objective(c0 + h * direction)
        j_minus = objective(c0 - h * direction)
        worst = max(worst, abs(j_plus - j_minus) / (2.0 * h))
    return worst
