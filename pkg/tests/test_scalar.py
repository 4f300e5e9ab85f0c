import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rankone.errors import EvaluationError
from rankone.prior import Prior, make_sparse_rademacher
from rankone.scalar import (
    denoiser,
    expect_over_prior_and_noise,
    gauss_expect,
    gauss_hermite,
    j_func,
    posterior_variance,
)


def _double_factorial(k):
    return math.prod(range(k - 1, 0, -2)) if k > 0 else 1


priors = st.builds(
    lambda rho: make_sparse_rademacher(rho), st.floats(0.02, 1.0)
) | st.builds(
    lambda a, b, w: Prior([(a, w), (b, 1 - w)]),
    st.floats(-3, 3),
    st.floats(-3, 3),
    st.floats(0.05, 0.95),
).filter(lambda p: p.size == 2)


class TestJ:
    def test_zero_arguments(self):
        for rho in (0.05, 0.6, 1.0):
            assert j_func(make_sparse_rademacher(rho), 0.0, 0.0) == pytest.approx(0.0, abs=1e-15)

    def test_rademacher_closed_form(self):
        p = make_sparse_rademacher(1.0)
        assert j_func(p, 2.0, 0.0) == pytest.approx(-1.0, abs=1e-15)
        for b in (-3.0, 0.4, 5.0):
            assert j_func(p, 0.7, b) == pytest.approx(math.log(math.cosh(b)) - 0.35, abs=1e-13)

    def test_sparse_three_term_sum(self):
        p = make_sparse_rademacher(0.6)
        expected = math.log(0.4 + 0.6 * math.exp(-0.5) * math.cosh(2.0))
        assert j_func(p, 1.0, 2.0) == pytest.approx(expected, abs=1e-14)

    def test_no_overflow(self):
        p = make_sparse_rademacher(0.3)
        for b in (700.0, -700.0, 1e4):
            v = j_func(p, 0.0, b)
            assert math.isfinite(v)
            assert v == pytest.approx(abs(b) + math.log(0.15), rel=1e-12)

    def test_broadcasting(self):
        p = make_sparse_rademacher(0.5)
        out = j_func(p, np.array([[0.0], [1.0]]), np.array([0.0, 1.0, 2.0]))
        assert out.shape == (2, 3)
        assert out[1, 2] == pytest.approx(j_func(p, 1.0, 2.0))

    def test_permutation_and_merge_invariance(self):
        a = Prior([(1.0, 0.2), (0.0, 0.5), (-2.0, 0.3)])
        b = Prior([(-2.0, 0.1), (1.0, 0.2), (-2.0, 0.2), (0.0, 0.5)])
        assert j_func(a, 0.3, 1.1) == j_func(b, 0.3, 1.1)


class TestDenoiser:
    def test_symmetric_at_zero(self):
        for rho in (0.1, 0.5, 1.0):
            assert denoiser(make_sparse_rademacher(rho), 3.0, 0.0) == 0.0

    def test_rademacher_tanh(self):
        assert denoiser(make_sparse_rademacher(1.0), 1.7, 3.0) == pytest.approx(math.tanh(3.0), abs=1e-15)
        assert denoiser(make_sparse_rademacher(1.0), 0.0, 3.0) == pytest.approx(0.99505475, abs=1e-8)

    def test_finite_difference_example(self):
        p = make_sparse_rademacher(0.3)
        h = 1e-6
        fd = (j_func(p, 0.5, 1 + h) - j_func(p, 0.5, 1 - h)) / (2 * h)
        assert denoiser(p, 0.5, 1.0) == pytest.approx(fd, abs=1e-8)

    @given(priors, st.floats(-2, 5), st.floats(-6, 6))
    @settings(max_examples=100, deadline=None)
    def test_derivatives_of_j(self, p, A, B):
        h = 1e-5
        fd1 = (j_func(p, A, B + h) - j_func(p, A, B - h)) / (2 * h)
        assert denoiser(p, A, B) == pytest.approx(fd1, abs=1e-7)
        fd2 = (denoiser(p, A, B + h) - denoiser(p, A, B - h)) / (2 * h)
        var = posterior_variance(p, A, B)
        assert var >= 0
        assert var == pytest.approx(fd2, abs=1e-6)

    @given(priors, st.floats(0, 5))
    @settings(max_examples=40, deadline=None)
    def test_monotone_in_b(self, p, A):
        grid = np.linspace(-8, 8, 401)
        assert np.all(np.diff(denoiser(p, A, grid)) >= -1e-14)


class TestQuadrature:
    def test_normalized_and_symmetric(self):
        for order in (5, 61, 121):
            q = gauss_hermite(order)
            assert abs(q.weights.sum() - 1) < 1e-12
            np.testing.assert_array_equal(q.nodes, -q.nodes[::-1])
            assert np.all(q.weights > 0)

    def test_examples(self):
        assert gauss_expect(lambda z: np.ones_like(z)) == pytest.approx(1.0, abs=1e-15)
        assert gauss_expect(lambda z: z**2) == pytest.approx(1.0, abs=1e-12)
        assert gauss_expect(lambda z: z**4) == pytest.approx(3.0, abs=1e-10)

    def test_fourth_moment_monte_carlo(self):
        z = np.random.default_rng(0).standard_normal(10**6)
        assert abs(np.mean(z**4) - gauss_expect(lambda t: t**4)) < 0.05

    @pytest.mark.parametrize("order", [5, 11, 21])
    def test_polynomial_exactness(self, order):
        q = gauss_hermite(order)
        for k in range(0, 2 * order):
            exact = _double_factorial(k) if k % 2 == 0 else 0.0
            got = gauss_expect(lambda z: z**k, q)
            # odd moments cancel terms of size about E|z|^k
            scale = max(1.0, _double_factorial(k + 1))
            assert got == pytest.approx(exact, rel=1e-10, abs=1e-10 * scale)

    def test_non_finite_names_node(self):
        with pytest.raises(EvaluationError, match="z="):
            gauss_expect(lambda z: np.where(z > 3, np.inf, z))

    def test_bad_order(self):
        with pytest.raises(ValueError):
            gauss_hermite(0)

    def test_joint_expectation(self):
        # E[(x* + z)^2] = E[x^2] + 1
        p = make_sparse_rademacher(0.4)
        v = expect_over_prior_and_noise(p, lambda x, z: (x + z) ** 2)
        assert v == pytest.approx(1.4, abs=1e-12)
