"""Shared fixtures and independent numerical oracles for the test suite.

The oracles deliberately avoid the library's own code paths: the normal
quantile is a bisection on math.erf, integrals go through
scipy.integrate.quad, and derivatives through central differences.
"""

import math

import numpy as np
import pytest

from claimquant import (DiscreteDistribution, LognormalKernel, RobustObjective,
                        UniformClaim, UtilitySpec)


def normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def normal_quantile(q: float, lo: float = -40.0, hi: float = 40.0) -> float:
    """Bisection on the erf-based CDF; independent of scipy.special.ndtri."""
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if normal_cdf(mid) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def central_difference(f, x: float, h: float = 1e-5) -> float:
    return (f(x + h) - f(x - h)) / (2.0 * h)


@pytest.fixture
def kernel025() -> LognormalKernel:
    return LognormalKernel(r=0.02, theta=0.25, T=1.0)


@pytest.fixture
def paper_utility() -> UtilitySpec:
    return UtilitySpec([950.0, 950.0], [0.010, 0.012])


@pytest.fixture
def paper_objective(paper_utility) -> RobustObjective:
    return RobustObjective(0.25, UniformClaim(2.0), paper_utility)


@pytest.fixture
def zero_claim_objective() -> RobustObjective:
    """Single exponential with no claim: every quantity has a closed form."""
    return RobustObjective(0.0, DiscreteDistribution.constant(0.0),
                           UtilitySpec([1.0], [1.0]))


def closed_form_quantile(kernel, lam, p, c=1.0, gamma=1.0):
    """Optimal quantile for a single exponential utility and zero claim."""
    return np.maximum(0.0, (np.log(c * gamma) - np.log(lam)
                            - np.log(kernel.quantile(1.0 - np.asarray(p)))) / gamma)
