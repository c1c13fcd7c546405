import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from claimquant import (DiscreteDistribution, LognormalKernel,
                        TruncatedNormalClaim, UniformClaim, probability_grid)
from conftest import normal_cdf, normal_quantile


class TestLognormalKernel:
    def test_median_closed_form(self):
        k = LognormalKernel(r=0.02, theta=0.4, T=1.0)
        assert k.quantile(0.5) == pytest.approx(math.exp(-0.10), rel=1e-14)

    def test_left_tail_limit(self):
        k = LognormalKernel(r=0.02, theta=0.4, T=1.0)
        assert k.quantile(1e-12) < k.quantile(1e-6) < k.quantile(0.01)
        assert k.quantile(1e-300) < 1e-6
        assert k.quantile(0.0) == 0.0

    def test_upper_endpoint_is_range_error(self):
        k = LognormalKernel(r=0.02, theta=0.4, T=1.0)
        with pytest.raises(ValueError):
            k.quantile(1.0)

    def test_quantile_against_erf_bisection_oracle(self):
        k = LognormalKernel(r=0.02, theta=0.4, T=1.0)
        # frozen from the oracle: Phi^{-1}(0.975) = 1.9599639845400536
        assert k.quantile(0.975) == pytest.approx(1.9817605054449055, rel=1e-12)
        for p in (0.975, 0.1, 0.63):
            oracle = math.exp(k.mu_log + k.sigma_log * normal_quantile(p))
            assert k.quantile(p) == pytest.approx(oracle, rel=1e-10)

    def test_cdf_quantile_inverse_pair(self):
        k = LognormalKernel(r=0.02, theta=0.25, T=1.0)
        p = np.linspace(1e-6, 1 - 1e-6, 2001)
        assert np.max(np.abs(k.cdf(k.quantile(p)) - p)) < 1e-10

    def test_cdf_frozen_value(self):
        k = LognormalKernel(r=0.02, theta=0.25, T=1.0)
        # Phi(0.05125/0.25) from the erf oracle
        assert k.cdf(1.0) == pytest.approx(0.5812139374874481, rel=1e-12)
        assert k.cdf(math.exp(k.mu_log)) == pytest.approx(0.5, abs=1e-14)

    def test_cdf_domain(self):
        k = LognormalKernel(r=0.02, theta=0.25, T=1.0)
        with pytest.raises(ValueError):
            k.cdf(0.0)
        with pytest.raises(ValueError):
            k.cdf(-1.0)

    def test_mean_identities(self):
        assert LognormalKernel(0.02, 0.3, 1.0).mean() == pytest.approx(
            math.exp(-0.02), rel=1e-15)
        assert LognormalKernel(0.0, 0.7, 1.0).mean() == 1.0

    def test_mean_matches_quantile_quadrature(self):
        k = LognormalKernel(r=0.02, theta=0.25, T=1.0)
        val, _ = quad(lambda p: k.quantile(p), 0.0, 1.0, limit=500, points=[1e-9, 1 - 1e-9])
        assert val == pytest.approx(k.mean(), abs=1e-6)

    def test_lower_partial_mean_matches_quadrature(self):
        k = LognormalKernel(r=0.02, theta=0.4, T=1.0)
        for qv in (0.1, 0.5, 0.9):
            val, _ = quad(lambda p: k.quantile(p), 0.0, qv, limit=500)
            assert k.lower_partial_mean(qv) == pytest.approx(val, abs=1e-8)

    def test_validation(self):
        with pytest.raises(ValueError):
            LognormalKernel(r=0.02, theta=0.0, T=1.0)
        with pytest.raises(ValueError):
            LognormalKernel(r=0.02, theta=0.3, T=0.0)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-0.05, 0.1), st.floats(0.05, 1.0), st.floats(0.1, 5.0))
    def test_quantile_increasing(self, r, theta, T):
        k = LognormalKernel(r=r, theta=theta, T=T)
        p = np.linspace(1e-5, 1 - 1e-5, 101)
        assert np.all(np.diff(k.quantile(p)) > 0)


class TestUniformClaim:
    def test_linear_quantile(self):
        c = UniformClaim(2.0)
        assert c.quantile(0.5) == 1.0
        assert c.quantile(0.0) == 0.0
        assert c.quantile(1.0) == 2.0

    def test_exact_lipschitz_increments(self):
        c = UniformClaim(2.0)
        for p, q in [(0.8, 0.3), (0.41, 0.4), (1.0, 0.0)]:
            assert c.quantile(p) - c.quantile(q) == 2.0 * (p - q)

    def test_derivative_and_bounds(self):
        c = UniformClaim(3.0)
        assert c.quantile_deriv(0.3) == 3.0
        assert c.lower == 0.0 and c.upper == 3.0
        with pytest.raises(ValueError):
            c.quantile(1.5)
        with pytest.raises(ValueError):
            UniformClaim(0.0)


class TestTruncatedNormalClaim:
    def test_symmetric_median(self):
        c = TruncatedNormalClaim(1.0, 0.5, 0.0, 2.0)
        assert c.quantile(0.5) == pytest.approx(1.0, abs=1e-12)

    def test_endpoints(self):
        c = TruncatedNormalClaim(1.0, 0.5, 0.0, 2.0)
        assert c.quantile(0.0) == 0.0
        assert c.quantile(1.0) == 2.0
        assert c.quantile(1e-9) == pytest.approx(0.0, abs=1e-5)

    def test_quantile_against_bisection_oracle(self):
        c = TruncatedNormalClaim(1.0, 0.5, 0.0, 2.0)
        fa, fb = normal_cdf(-2.0), normal_cdf(2.0)
        for p in (0.1, 0.3, 0.77):
            oracle = 1.0 + 0.5 * normal_quantile(fa + p * (fb - fa))
            assert c.quantile(p) == pytest.approx(oracle, abs=1e-10)
        # frozen from the oracle
        assert c.quantile(0.3) == pytest.approx(0.7507985587890307, abs=1e-10)

    def test_cdf_inverts_quantile(self):
        c = TruncatedNormalClaim(0.5, 0.8, -1.0, 3.0)
        p = np.linspace(1e-6, 1 - 1e-6, 501)
        assert np.max(np.abs(c.cdf(c.quantile(p)) - p)) < 1e-10

    def test_quantile_deriv_matches_finite_difference(self):
        c = TruncatedNormalClaim(1.0, 0.5, 0.0, 2.0)
        h = 1e-6
        for p in (0.2, 0.5, 0.9):
            fd = (c.quantile(p + h) - c.quantile(p - h)) / (2 * h)
            assert c.quantile_deriv(p) == pytest.approx(fd, rel=1e-6)

    def test_monotone_and_bounded(self):
        c = TruncatedNormalClaim(-1.0, 2.0, 0.0, 5.0)
        p = np.linspace(0.0, 1.0, 401)
        vals = c.quantile(p)
        assert np.all(np.diff(vals) >= 0)
        assert vals.min() >= 0.0 and vals.max() <= 5.0

    def test_validation(self):
        with pytest.raises(ValueError):
            TruncatedNormalClaim(0.0, -1.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            TruncatedNormalClaim(0.0, 1.0, 2.0, 1.0)


class TestDiscreteDistribution:
    def test_right_continuous_steps(self):
        d = DiscreteDistribution([(1.0, 0.5), (2.0, 0.25), (3.0, 0.25)])
        assert d.quantile(0.49) == 1.0
        assert d.quantile(0.5) == 2.0  # right-continuous at the jump
        assert d.quantile(0.75) == 3.0
        assert d.quantile(1.0) == 3.0
        assert d.quantile(0.0) == 1.0

    def test_single_atom_is_differentiable_constant(self):
        d = DiscreteDistribution.constant(1.5)
        assert d.quantile(0.3) == 1.5
        assert d.quantile_deriv(0.7) == 0.0

    def test_multi_atom_derivative_unsupported(self):
        d = DiscreteDistribution.uniform_atoms([1.0, 2.0])
        with pytest.raises(ValueError):
            d.quantile_deriv(0.5)

    def test_validation(self):
        with pytest.raises(ValueError):
            DiscreteDistribution([])
        with pytest.raises(ValueError):
            DiscreteDistribution([(1.0, 0.4), (2.0, 0.4)])
        with pytest.raises(ValueError):
            DiscreteDistribution([(1.0, -0.5), (2.0, 1.5)])

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.floats(-5, 5), min_size=1, max_size=6))
    def test_quantile_nondecreasing(self, values):
        d = DiscreteDistribution.uniform_atoms(values)
        p = np.linspace(0, 1, 97)
        assert np.all(np.diff(d.quantile(p)) >= 0)


def test_probability_grid():
    g = probability_grid(10, 1e-4)
    assert g[0] == 1e-4 and g[-1] == 1 - 1e-4 and g.size == 11
    with pytest.raises(ValueError):
        probability_grid(1)
    with pytest.raises(ValueError):
        probability_grid(10, 0.7)
