"""Tests for the variance-reduced estimators."""

import numpy as np
import pytest

from vrsmooth.combine import BOUNDARY_REACH, R_OPTIMAL
from vrsmooth.errors import SingularDesignError
from vrsmooth.estimators import (
    effective_delta,
    estimate_curve,
    fit_curve,
    m_tilde_a,
    m_tilde_pm,
    m_tilde_q,
)
from vrsmooth.kernels import EPANECHNIKOV, UNIFORM
from vrsmooth.scenarios import get_scenario, sample
from vrsmooth.simulate import rep_rng
from vrsmooth.smoother import Dataset, SmootherConfig, local_linear


def affine_data(n=250, a=2.0, b=3.0, seed=21):
    rng = np.random.default_rng(seed)
    xs = np.sort(rng.random(n))
    return Dataset(xs, a + b * xs)


def noisy_data(n=200, seed=22):
    rng = np.random.default_rng(seed)
    xs = np.sort(rng.random(n))
    ys = np.sin(5 * np.pi * xs) + 0.3 * rng.standard_normal(n)
    return Dataset(xs, ys)


class TestDegenerateCases:
    def test_zero_shift_is_plain_fit_bitwise(self):
        d = noisy_data()
        for ridge in (True, False):
            cfg = SmootherConfig(EPANECHNIKOV, 0.1, ridge=ridge)
            for x in (0.3, 0.5, 0.71):
                est = m_tilde_q(d, cfg, x, 0.0, 1.0)
                assert est.value == local_linear(d, cfg, x)

    def test_zero_width_is_plain_fit_bitwise(self):
        d = noisy_data()
        cfg = SmootherConfig(EPANECHNIKOV, 0.1)
        for variant_call in (
            lambda x: m_tilde_q(d, cfg, x, 0.6, 0.0),
            lambda x: m_tilde_pm(d, cfg, x, 0.0, +1),
            lambda x: m_tilde_a(d, cfg, x, 0.0),
        ):
            for x in (0.25, 0.5):
                assert variant_call(x).value == local_linear(d, cfg, x)

    def test_boundary_point_collapses_to_plain_fit(self):
        d = noisy_data()
        cfg = SmootherConfig(EPANECHNIKOV, 0.1)
        est = m_tilde_pm(d, cfg, 0.0, 1.0, +1)
        assert est.effective_delta == 0.0
        assert est.value == local_linear(d, cfg, 0.0)


class TestAffineExactness:
    def test_all_variants_reproduce_affine(self):
        d = affine_data()
        cfg = SmootherConfig(EPANECHNIKOV, 0.08, ridge=False)
        rng = np.random.default_rng(23)
        for _ in range(25):
            x = float(rng.uniform(0, 1))
            r = float(rng.uniform(-0.95, 0.95))
            delta = float(rng.uniform(0, 2))
            truth = 2.0 + 3.0 * x
            assert m_tilde_q(d, cfg, x, r, delta).value == pytest.approx(
                truth, abs=1e-9)
            assert m_tilde_a(d, cfg, x, delta).value == pytest.approx(
                truth, abs=1e-9)


class TestSidedEstimators:
    def test_mirror_symmetry_on_symmetric_data(self):
        # data symmetric about x = 0.5 with symmetric responses
        xs = np.array([0.3, 0.4, 0.45, 0.55, 0.6, 0.7])
        ys = np.array([2.0, 1.2, 1.1, 1.1, 1.2, 2.0])
        d = Dataset(xs, ys)
        cfg = SmootherConfig(UNIFORM, 0.25, ridge=False)
        p = m_tilde_pm(d, cfg, 0.5, 0.5, +1)
        m = m_tilde_pm(d, cfg, 0.5, 0.5, -1)
        assert p.value == pytest.approx(m.value, rel=1e-12)

    def test_average_identity_is_exact(self):
        d = noisy_data()
        cfg = SmootherConfig(EPANECHNIKOV, 0.09)
        for x in np.linspace(0.05, 0.95, 7):
            p = m_tilde_pm(d, cfg, float(x), 1.0, +1)
            m = m_tilde_pm(d, cfg, float(x), 1.0, -1)
            a = m_tilde_a(d, cfg, float(x), 1.0)
            assert a.value == (p.value + m.value) / 2.0
            assert a.effective_delta == p.effective_delta == m.effective_delta

    def test_seeded_golden_value(self):
        scen = get_scenario("sine", "uniform01", 1.0)
        ds = sample(scen, 100, rep_rng(20240611, 0))
        cfg = SmootherConfig(EPANECHNIKOV, 0.08)
        est = m_tilde_pm(ds, cfg, 0.5, 1.0, +1)
        assert est.effective_delta == 1.0
        assert est.value == pytest.approx(0.8155345163331245, rel=1e-12)

    def test_rejects_bad_sign(self):
        d = noisy_data()
        cfg = SmootherConfig(EPANECHNIKOV, 0.1)
        with pytest.raises(ValueError):
            m_tilde_pm(d, cfg, 0.5, 1.0, 0)


class TestBoundarySafety:
    @pytest.mark.parametrize("variant,r", [("plus", None), ("minus", None),
                                           ("avg", None), ("q", 0.9),
                                           ("q", -0.9), ("q", 0.3)])
    def test_grid_points_stay_inside_domain(self, variant, r):
        h, delta = 0.1, 1.5
        from vrsmooth.combine import coeffs_a, resolve_variant
        combos = resolve_variant(variant, r=r, delta=delta)
        for x in np.linspace(0.0, 1.0, 101):
            eff = effective_delta(variant, float(x), delta, h, r=r)
            assert eff <= delta + 1e-15
            for _w, spec in combos:
                for j in range(3):
                    if coeffs_a(spec.r)[j] == 0.0:
                        continue
                    point = x - (spec.r + 1.0 - j) * eff * h
                    assert -1e-12 <= point <= 1.0 + 1e-12

    def test_effective_delta_matches_curve(self):
        d = noisy_data()
        cfg = SmootherConfig(EPANECHNIKOV, 0.1)
        pts = np.linspace(0.0, 1.0, 21)
        _vals, effs = estimate_curve(d, cfg, "avg", delta=1.0, points=pts)
        for x, e in zip(pts, effs):
            assert effective_delta("avg", float(x), 1.0, 0.1) == pytest.approx(
                float(e), abs=0.0)

    def test_wide_shift_uses_larger_guard(self):
        # |r| beyond the optimal shift reaches farther than the default rule
        eff_wide = effective_delta("q", 0.1, 1.0, 0.1, r=0.95)
        eff_norm = effective_delta("q", 0.1, 1.0, 0.1, r=0.5)
        assert eff_wide < eff_norm
        assert eff_norm == pytest.approx(0.1 / (BOUNDARY_REACH * 0.1), rel=1e-12)


class TestLinearity:
    def test_implied_weights_sum_to_one(self):
        rng = np.random.default_rng(24)
        xs = np.sort(rng.random(30))
        cfg = SmootherConfig(EPANECHNIKOV, 0.3, ridge=False)
        for variant, r in (("q", 0.5), ("plus", None), ("avg", None)):
            weights = []
            for i in range(30):
                d = Dataset(xs, np.eye(30)[i])
                v, _ = estimate_curve(d, cfg, variant, delta=0.8, r=r,
                                      points=np.array([0.5]))
                weights.append(v[0])
            assert sum(weights) == pytest.approx(1.0, abs=1e-9)


class TestFitCurve:
    def test_singleton_consistent_with_pointwise(self):
        d = noisy_data()
        cfg = SmootherConfig(EPANECHNIKOV, 0.1)
        single = fit_curve(d, cfg, "avg", delta=1.0, points=[0.37])[0]
        point = m_tilde_a(d, cfg, 0.37, 1.0)
        assert single.value == point.value
        assert single.effective_delta == point.effective_delta

    def test_affine_grid_accuracy(self):
        d = affine_data()
        cfg = SmootherConfig(EPANECHNIKOV, 0.08, ridge=False)
        grid = np.linspace(0, 1, 401)
        ests = fit_curve(d, cfg, "avg", delta=1.0, points=grid)
        errs = [abs(e.value - (2.0 + 3.0 * g)) for e, g in zip(ests, grid)]
        assert max(errs) < 1e-8

    def test_deterministic(self):
        d = noisy_data()
        cfg = SmootherConfig(EPANECHNIKOV, 0.1)
        grid = np.linspace(0, 1, 51)
        a = fit_curve(d, cfg, "plus", delta=1.0, points=grid)
        b = fit_curve(d, cfg, "plus", delta=1.0, points=grid)
        assert [e.value for e in a] == [e.value for e in b]

    def test_collects_errors_without_aborting(self):
        # a sparse unridged fit leaves singular windows as NA markers
        xs = np.array([0.05, 0.051, 0.5, 0.501, 0.95, 0.951])
        ys = np.array([1.0, 1.1, 2.0, 2.1, 3.0, 3.1])
        d = Dataset(xs, ys)
        cfg = SmootherConfig(EPANECHNIKOV, 0.02, ridge=False)
        ests = fit_curve(d, cfg, "ll", points=np.linspace(0, 1, 41))
        failed = [e for e in ests if e.error is not None]
        fine = [e for e in ests if e.error is None]
        assert failed and all(np.isnan(e.value) for e in failed)
        assert fine  # the populated windows still produce estimates

    def test_pointwise_raises_on_singular_window(self):
        d = Dataset(np.array([0.5, 0.9]), np.array([1.0, 2.0]))
        cfg = SmootherConfig(EPANECHNIKOV, 0.05, ridge=False)
        with pytest.raises(SingularDesignError):
            m_tilde_a(d, cfg, 0.2, 1.0)

    def test_rejects_points_outside_domain(self):
        d = noisy_data()
        cfg = SmootherConfig(EPANECHNIKOV, 0.1)
        with pytest.raises(ValueError):
            estimate_curve(d, cfg, "avg", delta=1.0, points=[1.2])


class TestMonteCarloMoments:
    def test_variance_reduction_sanity(self):
        # quick check; the full-scale version runs in the acceptance suite
        from vrsmooth.simulate import pointwise_variance_study
        res = pointwise_variance_study(
            get_scenario("sine", "uniform01", 1.0), EPANECHNIKOV,
            n=500, h=0.05, x=0.5, delta=1.0, replications=400, seed=20240501)
        ratio = res["var"]["plus"] / res["var"]["ll"]
        assert 0.65 < ratio < 0.95
        assert res["var"]["avg"] < res["var"]["plus"]

    def test_bias_preservation_smooth_regression(self):
        # cubic truth: higher-order bias terms are tiny, so the combined
        # estimator's mean must track the plain fit within Monte Carlo noise
        from vrsmooth.smoother import local_linear_curve
        n, h, reps = 500, 0.05, 2000
        cfg = SmootherConfig(EPANECHNIKOV, h)
        pt = np.array([0.5])
        diffs = np.empty(reps)
        for i in range(reps):
            rng = rep_rng(20240612, i)
            xs = rng.random(n)
            ys = xs**3 + 0.5 * rng.standard_normal(n)
            d = Dataset(xs, ys)
            ll = local_linear_curve(d, cfg, pt)[0]
            q, _ = estimate_curve(d, cfg, "q", delta=1.0, r=R_OPTIMAL,
                                  points=pt)
            diffs[i] = q[0] - ll
        se = diffs.std(ddof=1) / np.sqrt(reps)
        assert abs(diffs.mean()) <= 2.0 * se
