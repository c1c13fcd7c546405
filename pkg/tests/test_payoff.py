import numpy as np
import pytest

from claimquant import (DiscreteDistribution, LognormalKernel, RobustObjective,
                        UniformClaim, UtilitySpec, default_rho_grid,
                        distribution_check, profile, solve)


@pytest.fixture
def kernel():
    return LognormalKernel(r=0.02, theta=0.25, T=1.0)


@pytest.fixture
def result(kernel):
    obj = RobustObjective(0.25, UniformClaim(2.0),
                          UtilitySpec([950.0, 950.0], [0.010, 0.012]))
    return solve(obj, kernel, 25.0, n_cells=1500)


def test_grid_states_recover_grid_values(kernel, result):
    idx = np.arange(100, result.p.size - 100, 97)
    rho = kernel.quantile(1.0 - result.p[idx])
    prof = profile(result, kernel, rho)
    # 1 - F(Q(1-p)) = p up to inverse-pair roundoff, then linear interp
    assert np.max(np.abs(prof.payoff - result.q[idx])) < 1e-6


def test_payoff_zero_beyond_threshold_state(kernel, result):
    threshold = kernel.quantile(1.0 - result.pbar)
    rho = np.geomspace(threshold * 1.001, threshold * 10, 200)
    prof = profile(result, kernel, rho)
    assert np.all(prof.payoff == 0.0)


def test_payoff_non_increasing(kernel, result):
    prof = profile(result, kernel)
    assert np.all(np.diff(prof.payoff) <= 1e-12)


def test_default_grid_range(kernel):
    grid = default_rho_grid(kernel)
    assert grid.size == 2001
    assert grid[0] == pytest.approx(kernel.quantile(0.001))
    assert grid[-1] == pytest.approx(kernel.quantile(0.999))
    assert np.all(np.diff(grid) > 0)


def test_rejects_nonpositive_states(kernel, result):
    with pytest.raises(ValueError):
        profile(result, kernel, np.array([-1.0, 0.5]))


def test_monte_carlo_budget_within_three_stderr(kernel):
    obj = RobustObjective(0.0, DiscreteDistribution.constant(0.0),
                          UtilitySpec([1.0], [1.0]))
    res = solve(obj, kernel, 0.8, n_cells=2000)
    check = distribution_check(res, kernel, sample_count=10**6, seed=3)
    assert abs(check["z_score"]) < 3.0


def test_monte_carlo_zero_solution(kernel):
    obj = RobustObjective(0.0, DiscreteDistribution.constant(0.0),
                          UtilitySpec([1.0], [1.0]))
    res = solve(obj, kernel, 1e9, n_cells=400)
    check = distribution_check(res, kernel, sample_count=10**4, seed=0)
    assert check["mc_budget"] == 0.0


def test_stderr_shrinks_like_root_two(kernel):
    obj = RobustObjective(0.0, DiscreteDistribution.constant(0.0),
                          UtilitySpec([1.0], [1.0]))
    res = solve(obj, kernel, 0.8, n_cells=800)
    small = distribution_check(res, kernel, sample_count=2 * 10**5, seed=11)
    large = distribution_check(res, kernel, sample_count=4 * 10**5, seed=11)
    ratio = small["stderr"] / large["stderr"]
    assert 1.3 < ratio < 1.55
