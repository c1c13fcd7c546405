"""Terminal payoff profiles: wealth as a function of the pricing-kernel state.

The optimal terminal wealth is Q(1 - F_rho(rho)); since Q is non-decreasing
and F_rho increasing, the payoff is non-increasing in rho (wealth and the
pricing kernel are anti-comonotone).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import LognormalKernel
from .solver import SolveResult

PROFILE_COLUMNS = ("rho", "payoff")


@dataclass(frozen=True)
class PayoffProfile:
    rho: np.ndarray
    payoff: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rho", np.asarray(self.rho, dtype=float))
        object.__setattr__(self, "payoff", np.asarray(self.payoff, dtype=float))


def default_rho_grid(kernel: LognormalKernel, n: int = 2001,
                     p_lo: float = 0.001, p_hi: float = 0.999) -> np.ndarray:
    """Log-spaced kernel states covering the visual range [Q_rho(p_lo), Q_rho(p_hi)]."""
    return np.geomspace(kernel.quantile(p_lo), kernel.quantile(p_hi), n)


def profile(result: SolveResult, kernel: LognormalKernel,
            rho_grid=None) -> PayoffProfile:
    """Pointwise Q(1 - F_rho(rho)) by linear interpolation of the solve grid."""
    if rho_grid is None:
        rho_grid = default_rho_grid(kernel)
    rho_grid = np.asarray(rho_grid, dtype=float)
    if np.any(rho_grid <= 0):
        raise ValueError("kernel states must be positive")
    p = 1.0 - kernel.cdf(rho_grid)
    payoff = result.quantile()(p)
    return PayoffProfile(rho_grid, payoff)


def distribution_check(result: SolveResult, kernel: LognormalKernel,
                       sample_count: int = 10**6, seed: int = 0) -> dict:
    """Monte Carlo check that E[rho * payoff] reproduces the budget.

    Draws rho = Q_rho(v) with v uniform, pushes it through the payoff map,
    and reports the sample mean of rho * payoff with its standard error.
    """
    rng = np.random.default_rng(seed)
    v = rng.random(sample_count)
    eps = 1e-12
    v = np.clip(v, eps, 1.0 - eps)
    rho = kernel.quantile(v)
    wealth = result.quantile()(1.0 - v)
    prods = rho * wealth
    mean = float(np.mean(prods))
    stderr = float(np.std(prods, ddof=1) / np.sqrt(sample_count))
    return {
        "mc_budget": mean,
        "stderr": stderr,
        "budget": result.budget,
        "z_score": (mean - result.budget) / stderr if stderr > 0 else 0.0,
        "samples": sample_count,
    }
