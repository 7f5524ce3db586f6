import numpy as np
import pytest

from jitterpart.discrepancy import expected_l2sq
from jitterpart.mc_oracle import (
    DegenerateRegionError,
    MCEstimate,
    estimate_expected_l2sq,
    sample_pair,
)
from jitterpart.regions import Region


class TestSamplePair:
    def test_membership_postcondition(self, horizontal):
        rng = np.random.Generator(np.random.Philox(11))
        for _ in range(200):
            inside, outside = sample_pair(horizontal, rng)
            assert inside[1] <= 0.5
            assert outside[1] > 0.5

    def test_unpartitioned_draws_two_uniforms(self, uniform_region):
        rng = np.random.Generator(np.random.Philox(12))
        a, b = sample_pair(uniform_region, rng)
        assert all(0.0 <= v <= 1.0 for v in (*a, *b))

    def test_empirical_acceptance_rate(self, quarter_disk_half):
        rng = np.random.Generator(np.random.Philox(13))
        n = 100_000
        pts = rng.random((n, 2))
        frac = float(np.mean(quarter_disk_half.contains(pts[:, 0], pts[:, 1])))
        p = quarter_disk_half.area
        assert abs(frac - p) <= 4.0 * np.sqrt(p * (1 - p) / n)


class TestEstimate:
    def test_uniform_baseline(self, uniform_region):
        est = estimate_expected_l2sq(uniform_region, 200_000, seed=5)
        assert abs(est.mean - 5.0 / 72.0) <= 3.0 * est.std_error

    def test_horizontal(self, horizontal):
        est = estimate_expected_l2sq(horizontal, 200_000, seed=5)
        assert abs(est.mean - 1.0 / 18.0) <= 3.0 * est.std_error

    def test_agrees_with_quadrature(self, polyline_caption):
        est = estimate_expected_l2sq(polyline_caption, 200_000, seed=5)
        quad = expected_l2sq(polyline_caption, 1e-6)
        assert abs(est.mean - quad.value) <= 3.0 * est.std_error

    def test_quarter_disk_published_value(self, quarter_disk_half):
        est = estimate_expected_l2sq(quarter_disk_half, 1_000_000, seed=7)
        assert abs(est.mean - 0.0471) <= max(3.0 * est.std_error, 5e-4)

    def test_minimum_sample_count(self, horizontal):
        with pytest.raises(ValueError):
            estimate_expected_l2sq(horizontal, 999, seed=0)

    def test_reproducible(self, horizontal):
        a = estimate_expected_l2sq(horizontal, 50_000, seed=42, shard_count=4)
        b = estimate_expected_l2sq(horizontal, 50_000, seed=42, shard_count=4)
        assert a == b

    def test_seed_changes_result(self, horizontal):
        a = estimate_expected_l2sq(horizontal, 50_000, seed=1)
        b = estimate_expected_l2sq(horizontal, 50_000, seed=2)
        assert a.mean != b.mean

    def test_thread_override_preserves_result(self, horizontal, monkeypatch):
        serial = estimate_expected_l2sq(horizontal, 50_000, seed=9, shard_count=4)
        monkeypatch.setenv("JITTERPART_THREADS", "4")
        threaded = estimate_expected_l2sq(horizontal, 50_000, seed=9, shard_count=4)
        assert serial == threaded

    def test_variance_scaling(self, horizontal):
        small = estimate_expected_l2sq(horizontal, 100_000, seed=3)
        large = estimate_expected_l2sq(horizontal, 400_000, seed=3)
        ratio = small.std_error / large.std_error
        assert ratio == pytest.approx(2.0, rel=0.2)

    def test_degenerate_region_detected(self):
        class NeverInside(Region):
            kind = "stub"
            area = 0.5

            def contains(self, x, y):
                return np.zeros_like(np.asarray(x, dtype=float), dtype=bool)

        with pytest.raises(DegenerateRegionError):
            estimate_expected_l2sq(NeverInside(), 1000, seed=0)

    def test_estimate_fields(self, horizontal):
        est = estimate_expected_l2sq(horizontal, 10_000, seed=7, shard_count=2)
        assert isinstance(est, MCEstimate)
        assert est.n_samples == 10_000
        assert est.seed == 7
        assert est.shard_count == 2
        assert est.std_error > 0
        assert est.mean >= 0
