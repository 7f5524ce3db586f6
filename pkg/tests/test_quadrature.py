import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from jitterpart.quadrature import (
    MAX_RULE_ORDER,
    QuadratureError,
    gauss_legendre,
    integrate_1d,
    integrate_2d,
)


class TestGaussLegendre:
    def test_midpoint_rule(self):
        rule = gauss_legendre(1, -1.0, 1.0)
        assert rule.nodes == pytest.approx([0.0], abs=1e-15)
        assert rule.weights == pytest.approx([2.0], abs=1e-15)

    def test_two_point_rule(self):
        rule = gauss_legendre(2, -1.0, 1.0)
        assert rule.nodes == pytest.approx([-1 / math.sqrt(3), 1 / math.sqrt(3)], abs=1e-15)
        assert rule.weights == pytest.approx([1.0, 1.0], abs=1e-15)

    def test_two_point_exact_for_cubic(self):
        rule = gauss_legendre(2, 0.0, 1.0)
        assert rule.apply(lambda x: x**3) == pytest.approx(0.25, abs=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 3, 5, 10, 40, 200])
    def test_invariants(self, n):
        a, b = 0.3, 1.7
        rule = gauss_legendre(n, a, b)
        assert rule.weights.sum() == pytest.approx(b - a, rel=1e-14)
        assert np.all(np.diff(rule.nodes) > 0)
        assert rule.nodes[0] > a and rule.nodes[-1] < b
        # highest degree integrated exactly
        d = 2 * n - 1
        exact = (b ** (d + 1) - a ** (d + 1)) / (d + 1)
        assert rule.apply(lambda x: x**d) == pytest.approx(exact, rel=1e-13)

    def test_matches_reference_nodes(self):
        x_ref, w_ref = np.polynomial.legendre.leggauss(64)
        rule = gauss_legendre(64, -1.0, 1.0)
        assert rule.nodes == pytest.approx(x_ref, abs=1e-14)
        assert rule.weights == pytest.approx(w_ref, abs=1e-14)

    def test_invalid_interval(self):
        with pytest.raises(QuadratureError):
            gauss_legendre(4, 1.0, 1.0)
        with pytest.raises(QuadratureError):
            gauss_legendre(4, 2.0, 1.0)

    def test_order_cap(self):
        assert MAX_RULE_ORDER >= 256
        gauss_legendre(256, 0.0, 1.0)
        with pytest.raises(QuadratureError):
            gauss_legendre(MAX_RULE_ORDER + 1, 0.0, 1.0)
        with pytest.raises(QuadratureError):
            gauss_legendre(0, 0.0, 1.0)

    @given(degree=st.integers(min_value=0, max_value=12),
           coeffs=st.lists(st.floats(-3, 3), min_size=1, max_size=13))
    def test_polynomial_exactness(self, degree, coeffs):
        coeffs = np.asarray(coeffs[: degree + 1])
        if coeffs.size == 0:
            return
        n = max(1, (coeffs.size + 1) // 2 + 1)
        rule = gauss_legendre(n, 0.0, 1.0)
        truth = float(np.sum(coeffs / np.arange(1, coeffs.size + 1)))
        approx = rule.apply(lambda x: np.polynomial.polynomial.polyval(x, coeffs))
        assert approx == pytest.approx(truth, abs=1e-13 * max(1.0, abs(truth)))


class TestIntegrate1D:
    def test_square(self):
        res = integrate_1d(lambda x: x**2, 0.0, 1.0, 1e-9)
        assert res.converged
        assert res.value == pytest.approx(1.0 / 3.0, abs=1e-9)

    def test_one_minus_y_squared(self):
        res = integrate_1d(lambda y: (1 - y) ** 2, 0.0, 1.0, 1e-9)
        assert res.value == pytest.approx(1.0 / 3.0, abs=1e-9)

    def test_weighted_line_tail(self):
        # (1-y) * g(y) with g(y) = 1-y on [1/2, 1]: antiderivative -(1-y)^3/3
        res = integrate_1d(lambda y: (1 - y) * (1 - y), 0.5, 1.0, 1e-9)
        assert res.value == pytest.approx(1.0 / 24.0, abs=1e-9)

    def test_error_estimate_within_tolerance(self):
        res = integrate_1d(np.cos, 0.0, 2.0, 1e-10)
        assert res.converged
        assert res.error_estimate <= 1e-10
        assert res.value == pytest.approx(math.sin(2.0), abs=1e-10)

    def test_reversed_interval_sign(self):
        fwd = integrate_1d(lambda x: x, 0.0, 1.0, 1e-10)
        rev = integrate_1d(lambda x: x, 1.0, 0.0, 1e-10)
        assert rev.value == pytest.approx(-fwd.value, abs=1e-14)

    def test_purity(self):
        f = lambda x: np.exp(-x) * np.sin(7 * x)
        r1 = integrate_1d(f, 0.0, 3.0, 1e-8)
        r2 = integrate_1d(f, 0.0, 3.0, 1e-8)
        assert r1 == r2

    def test_monotone_in_tolerance(self):
        f = lambda x: np.abs(x - 1.0 / 3.0)  # kinked
        loose = integrate_1d(f, 0.0, 1.0, 1e-4)
        tight = integrate_1d(f, 0.0, 1.0, 1e-10)
        assert abs(tight.value - loose.value) <= loose.error_estimate + 1e-15

    def test_max_depth_reported_not_fatal(self):
        f = lambda x: 1.0 / np.sqrt(np.abs(x - 1.0 / 3.0) + 1e-300)
        res = integrate_1d(f, 0.0, 1.0, 1e-13)
        assert not res.converged
        assert res.error_estimate > 1e-13
        truth = 2 * math.sqrt(1.0 / 3.0) + 2 * math.sqrt(2.0 / 3.0)
        assert res.value == pytest.approx(truth, rel=1e-3)

    def test_kinked_integrand(self):
        res = integrate_1d(lambda x: np.minimum(x, 0.4), 0.0, 1.0, 1e-10)
        assert res.value == pytest.approx(0.4 * 0.4 / 2 + 0.6 * 0.4, abs=1e-10)

    def test_invalid_tolerance(self):
        with pytest.raises(QuadratureError):
            integrate_1d(lambda x: x, 0.0, 1.0, 0.0)


class TestIntegrate2D:
    def test_xy(self):
        res = integrate_2d(lambda x, y: x * y, (0, 1, 0, 1), 1e-8)
        assert res.converged
        assert res.value == pytest.approx(0.25, abs=1e-8)

    def test_x2y2(self):
        res = integrate_2d(lambda x, y: x * x * y * y, (0, 1, 0, 1), 1e-8)
        assert res.value == pytest.approx(1.0 / 9.0, abs=1e-8)

    def test_uniform_baseline_integrand(self):
        res = integrate_2d(lambda x, y: 2 * x * y * (1 - x * y) / 4, (0, 1, 0, 1), 1e-8)
        assert res.value == pytest.approx(5.0 / 72.0, abs=1e-8)

    def test_kink_along_line(self):
        res = integrate_2d(lambda x, y: np.maximum(x + y - 1.0, 0.0), (0, 1, 0, 1), 1e-8)
        assert res.value == pytest.approx(1.0 / 6.0, abs=1e-8)
        assert res.error_estimate <= 1e-8

    def test_purity(self):
        f = lambda x, y: np.abs(x - y) ** 1.5
        r1 = integrate_2d(f, (0, 1, 0, 1), 1e-7)
        r2 = integrate_2d(f, (0, 1, 0, 1), 1e-7)
        assert r1 == r2

    def test_monotone_in_tolerance(self):
        f = lambda x, y: np.where(x * x + y * y <= 0.64, 1.0, 0.0)
        loose = integrate_2d(f, (0, 1, 0, 1), 1e-3)
        tight = integrate_2d(f, (0, 1, 0, 1), 1e-6)
        assert abs(tight.value - loose.value) <= loose.error_estimate + 1e-12

    def test_subrectangle(self):
        res = integrate_2d(lambda x, y: x * y, (0.1, 0.4, 0.9, 1.0), 1e-10)
        truth = (0.4**2 - 0.1**2) / 2 * (1.0 - 0.81) / 2
        assert res.value == pytest.approx(truth, abs=1e-10)

    def test_invalid_rect(self):
        with pytest.raises(QuadratureError):
            integrate_2d(lambda x, y: x, (0, 0, 0, 1), 1e-6)
