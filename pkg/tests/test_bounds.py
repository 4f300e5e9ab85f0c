import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rankone.amp import state_evolution_run
from rankone.bounds import (
    ModelPoint,
    evaluate_point,
    golden_section,
    i_bethe,
    i_bethe_prime,
    i_lower,
    i_lower_prime,
    mi_from_free_energy,
    minimize_bound,
    spectral_threshold,
    state_evolution_step,
)
from rankone.errors import DomainError
from rankone.prior import Prior, make_sparse_rademacher
from rankone.scalar import j_func


def mp(rho, delta, order=61):
    return ModelPoint(make_sparse_rademacher(rho), delta, order)


def _mc_expect_j(point, m, draws, seed):
    """Monte Carlo E_{x*, z} J(m/delta, m x*/delta + sqrt(m/delta) z) in chunks."""
    rng = np.random.default_rng(seed)
    a = m / point.delta
    chunks = []
    for _ in range(draws // 10**6):
        x = point.prior.sample(rng, size=10**6)
        z = rng.standard_normal(10**6)
        chunks.append(j_func(point.prior, a, a * x + math.sqrt(a) * z))
    values = np.concatenate(chunks)
    return values.mean(), values.std(ddof=1) / math.sqrt(values.size)


class TestBethe:
    def test_value_at_zero(self):
        assert i_bethe(mp(1, 2), 0.0) == 0.125
        for rho, d in [(0.05, 0.3), (0.6, 0.7)]:
            assert i_bethe(mp(rho, d), 0.0) == pytest.approx(rho**2 / (4 * d), abs=1e-15)

    def test_monte_carlo_oracle(self):
        point = mp(0.6, 0.5)
        m = 0.3
        mean, se = _mc_expect_j(point, m, 10**7, seed=11)
        quad = (m**2 + 0.36) / 2.0 - i_bethe(point, m)
        assert abs(quad - mean) < 3 * se

    def test_vectorized_matches_scalar(self):
        point = mp(0.4, 0.2)
        ms = np.linspace(0, 0.4, 7)
        np.testing.assert_allclose(i_bethe(point, ms), [i_bethe(point, m) for m in ms], rtol=0, atol=1e-15)

    def test_negative_m_rejected(self):
        with pytest.raises(DomainError):
            i_bethe(mp(1, 1), -0.1)

    @pytest.mark.parametrize("rho,delta", [(1.0, 0.5), (0.3, 0.05), (0.05, 0.004)])
    def test_derivative_by_finite_differences(self, rho, delta):
        point = mp(rho, delta)
        h = 1e-6 * rho
        for m in np.linspace(0.1, 0.9, 5) * rho:
            fd = (i_bethe(point, m + h) - i_bethe(point, m - h)) / (2 * h)
            assert i_bethe_prime(point, m) == pytest.approx(fd, rel=1e-5, abs=1e-6)


class TestLower:
    def test_substitution_identity(self):
        point = mp(0.3, 0.1)
        for m in (0.0, 0.05, 0.2, 0.3):
            assert i_lower(point, m, m) == pytest.approx(i_bethe(point, m), abs=1e-12)

    def test_zero(self):
        assert i_lower(mp(0.6, 0.4), 0.0, 0.0) == pytest.approx(0.36 / 1.6, abs=1e-15)

    def test_derivative_by_finite_differences(self):
        point = mp(0.2, 0.02)
        m_hat = 0.1
        h = 1e-7
        for m in (0.02, 0.09, 0.17):
            fd = (i_lower(point, m + h, m_hat) - i_lower(point, m - h, m_hat)) / (2 * h)
            assert i_lower_prime(point, m, m_hat) == pytest.approx(fd, rel=1e-5, abs=1e-6)

    def test_separated_in_mismatch_region(self):
        point = mp(0.05, 0.005)
        res = evaluate_point(point)
        assert res.i_l_min < res.i_b_min - 1e-3
        assert not res.bounds_match


class TestMinimize:
    def test_trivial_phase(self):
        res = minimize_bound(mp(1, 2), "bethe")
        assert res.m_star == 0.0
        assert res.value == 0.125

    def test_nontrivial_phase_matches_state_evolution(self):
        point = mp(1, 0.5)
        res = minimize_bound(point, "bethe")
        assert res.m_star > 0
        se = state_evolution_run(point, 0.01)
        assert se.converged
        assert res.m_star == pytest.approx(se.fixed_point, abs=1e-6)

    def test_candidates_sorted_and_within_tie(self):
        res = minimize_bound(mp(0.2, 0.02), "bethe")
        ms = [m for m, _ in res.candidates]
        assert ms == sorted(ms)
        assert all(v <= res.value + 1e-9 for _, v in res.candidates)

    def test_global_not_local(self):
        # dense grid scan cannot find anything lower than the reported minimum
        point = mp(0.1, 0.009)
        res = minimize_bound(point, "bethe")
        grid = np.linspace(0, 0.1, 20001)
        assert res.value <= i_bethe(point, grid).min() + 1e-12

    def test_lower_needs_m_hat(self):
        with pytest.raises(DomainError):
            minimize_bound(mp(1, 1), "lower")

    def test_unknown_bound(self):
        with pytest.raises(DomainError):
            minimize_bound(mp(1, 1), "middle")

    def test_golden_section_parabola(self):
        x, fx = golden_section(lambda t: (t - 0.3) ** 2 + 1, 0.0, 1.0)
        # comparing values resolves x only to about sqrt(machine epsilon)
        assert x == pytest.approx(0.3, abs=1e-7)
        assert fx == pytest.approx(1.0, abs=1e-15)


class TestEvaluatePoint:
    def test_tight_region(self):
        assert evaluate_point(mp(0.6, 1.0)).bounds_match

    @pytest.mark.parametrize("delta", [0.05, 0.3, 0.5, 0.9, 1.0, 1.1, 2.0, 3.5])
    def test_dense_case_always_matches(self, delta):
        assert evaluate_point(mp(1.0, delta)).bounds_match

    @given(st.floats(0.02, 1.0), st.floats(0.002, 2.0))
    @settings(max_examples=40, deadline=None)
    def test_invariants(self, rho, delta):
        point = mp(rho, delta)
        res = evaluate_point(point)
        assert 0 <= res.m_hat <= rho + 1e-15
        assert 0 <= res.m_tilde <= rho + 1e-15
        assert res.i_l_min <= res.i_b_min + 1e-9
        assert i_lower(point, res.m_hat, res.m_hat) == pytest.approx(res.i_b_min, abs=1e-12)
        assert abs(i_lower_prime(point, res.m_hat, res.m_hat)) < 1e-6
        expected = abs(res.i_l_min - res.i_b_min) < 1e-6 and abs(res.m_tilde - res.m_hat) < 1e-4
        assert res.bounds_match == expected

    @pytest.mark.parametrize("rho,delta", [(1.0, 0.5), (0.6, 0.3), (0.2, 0.02), (0.05, 0.005)])
    def test_quadrature_order_robustness(self, rho, delta):
        a, b = evaluate_point(mp(rho, delta, 61)), evaluate_point(mp(rho, delta, 121))
        assert a.i_b_min == pytest.approx(b.i_b_min, abs=1e-8)
        assert a.i_l_min == pytest.approx(b.i_l_min, abs=1e-8)
        assert a.m_hat == pytest.approx(b.m_hat, abs=1e-6)
        assert a.m_tilde == pytest.approx(b.m_tilde, abs=1e-6)

    def test_minimum_non_increasing_in_delta(self):
        for rho in (0.05, 0.6, 1.0):
            values = [minimize_bound(mp(rho, d)).value for d in np.geomspace(0.001, 3, 40)]
            assert np.all(np.diff(values) <= 1e-12)


class TestStateEvolution:
    def test_zero_is_fixed(self):
        assert state_evolution_step(mp(0.3, 0.1), 0.0) == 0.0

    def test_rademacher_monte_carlo(self):
        point = mp(1.0, 0.7)
        m = 0.4
        rng = np.random.default_rng(3)
        a = m / point.delta
        z = rng.standard_normal(10**7)
        x = rng.choice([-1.0, 1.0], size=10**7)
        samples = x * np.tanh(a * x + math.sqrt(a) * z)
        se = samples.std(ddof=1) / math.sqrt(samples.size)
        assert abs(state_evolution_step(point, m) - samples.mean()) < 3 * se

    @pytest.mark.parametrize("m0", [0.05, 0.5, 1.0])
    def test_trivial_phase_goes_to_zero(self, m0):
        assert state_evolution_run(mp(1.0, 2.0), m0).fixed_point < 1e-8

    @given(st.floats(0.05, 1.0), st.floats(0.002, 1.5), st.floats(0.01, 1.0))
    @settings(max_examples=25, deadline=None)
    def test_fixed_points_are_stationary(self, rho, delta, frac):
        point = mp(rho, delta)
        trace = state_evolution_run(point, frac * rho)
        if trace.converged:
            assert abs(i_bethe_prime(point, trace.fixed_point)) < 1e-6
            assert abs(state_evolution_step(point, trace.fixed_point) - trace.fixed_point) < 1e-9

    def test_spectral_threshold(self):
        assert spectral_threshold(make_sparse_rademacher(0.3)) == pytest.approx(0.09, abs=1e-15)
        # linear stability: just below it, i_B decreases away from 0; just above, it increases
        p = make_sparse_rademacher(0.3)
        assert i_bethe_prime(ModelPoint(p, 0.08), 1e-6) < 0
        assert i_bethe_prime(ModelPoint(p, 0.10), 1e-6) > 0

    def test_asymmetric_prior(self):
        p = Prior([(0.0, 0.5), (1.0, 0.5)])
        res = evaluate_point(ModelPoint(p, 0.5))
        assert res.m_hat > 0


class TestFreeEnergy:
    def test_examples(self):
        assert mi_from_free_energy(mp(0.6, 0.5), -0.36 / 2.0) == pytest.approx(0.0, abs=1e-15)
        assert mi_from_free_energy(mp(1, 2), 0.0) == 0.125

    def test_non_finite(self):
        with pytest.raises(DomainError):
            mi_from_free_energy(mp(1, 2), float("nan"))
