"""Quantile/CDF models for the pricing kernel and the exogenous claim.

Only the distributions the solver actually needs: a lognormal pricing kernel,
uniform and truncated-normal claims, and finite discrete supports for the
enumeration oracles.  All types are immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri


def probability_grid(n_cells: int, eps_p: float = 1e-6) -> np.ndarray:
    """Uniform grid of n_cells+1 points on [eps_p, 1-eps_p].

    The kernel quantile is unbounded at 1, so every p-grid is clipped away
    from the endpoints.
    """
    if n_cells < 2:
        raise ValueError("need at least 2 grid cells")
    if not 0 < eps_p < 0.5:
        raise ValueError("eps_p must lie in (0, 0.5)")
    return np.linspace(eps_p, 1.0 - eps_p, n_cells + 1)


@dataclass(frozen=True)
class LognormalKernel:
    """Pricing kernel rho with log rho ~ N(mu_log, sigma_log^2).

    mu_log = -(r + theta^2/2) T and sigma_log = |theta| sqrt(T), so that
    E[rho] = exp(-r T).
    """

    r: float
    theta: float
    T: float

    def __post_init__(self):
        if self.theta == 0:
            raise ValueError("market price of risk theta must be nonzero")
        if self.T <= 0:
            raise ValueError("maturity T must be positive")
        if not all(map(math.isfinite, (self.r, self.theta, self.T))):
            raise ValueError("kernel parameters must be finite")

    @property
    def mu_log(self) -> float:
        return -(self.r + 0.5 * self.theta**2) * self.T

    @property
    def sigma_log(self) -> float:
        return abs(self.theta) * math.sqrt(self.T)

    def quantile(self, p):
        """Q_rho(p) = exp(mu_log + sigma_log * Phi^{-1}(p)) on (0,1).

        p = 0 returns the limit 0; p = 1 is a range error (the kernel is
        unbounded above).
        """
        p = np.asarray(p, dtype=float)
        if np.any(p < 0) or np.any(p > 1):
            raise ValueError("probability outside [0, 1]")
        if np.any(p == 1):
            raise ValueError("kernel quantile diverges at p = 1")
        with np.errstate(divide="ignore"):
            out = np.exp(self.mu_log + self.sigma_log * ndtri(p))
        return out if out.ndim else float(out)

    def cdf(self, z):
        """F_rho(z) = Phi((ln z - mu_log)/sigma_log) for z > 0."""
        z = np.asarray(z, dtype=float)
        if np.any(z <= 0):
            raise ValueError("the pricing kernel is supported on (0, inf)")
        out = ndtr((np.log(z) - self.mu_log) / self.sigma_log)
        return out if out.ndim else float(out)

    def mean(self) -> float:
        """E[rho] = exp(-r T)."""
        return math.exp(-self.r * self.T)

    def lower_partial_mean(self, q):
        """integral_0^q Q_rho(s) ds = E[rho] * Phi(Phi^{-1}(q) - sigma_log).

        Exact (lognormal partial expectation); q may be 0 or 1.
        """
        q = np.asarray(q, dtype=float)
        if np.any(q < 0) or np.any(q > 1):
            raise ValueError("probability outside [0, 1]")
        with np.errstate(divide="ignore"):
            out = self.mean() * ndtr(ndtri(q) - self.sigma_log)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class UniformClaim:
    """Claim uniform on [0, y]: Q(p) = y p, Lipschitz with constant y."""

    y: float

    def __post_init__(self):
        if not (math.isfinite(self.y) and self.y > 0):
            raise ValueError("uniform claim endpoint y must be positive")

    @property
    def lower(self) -> float:
        return 0.0

    @property
    def upper(self) -> float:
        return self.y

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        if np.any(p < 0) or np.any(p > 1):
            raise ValueError("probability outside [0, 1]")
        out = self.y * p
        return out if out.ndim else float(out)

    def quantile_deriv(self, p):
        p = np.asarray(p, dtype=float)
        out = np.full_like(p, self.y)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class TruncatedNormalClaim:
    """Normal(mu, sigma^2) conditioned on [a, b]; bounded, strictly increasing quantile."""

    mu: float
    sigma: float
    a: float
    b: float

    def __post_init__(self):
        if not all(map(math.isfinite, (self.mu, self.sigma, self.a, self.b))):
            raise ValueError("truncated normal parameters must be finite")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if not self.a < self.b:
            raise ValueError("truncation bounds must satisfy a < b")

    @property
    def lower(self) -> float:
        return self.a

    @property
    def upper(self) -> float:
        return self.b

    def _standard_bounds(self):
        alpha = (self.a - self.mu) / self.sigma
        beta = (self.b - self.mu) / self.sigma
        return alpha, beta, ndtr(alpha), ndtr(beta)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        alpha, beta, fa, fb = self._standard_bounds()
        z = np.clip((x - self.mu) / self.sigma, alpha, beta)
        out = (ndtr(z) - fa) / (fb - fa)
        return out if out.ndim else float(out)

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        if np.any(p < 0) or np.any(p > 1):
            raise ValueError("probability outside [0, 1]")
        _, _, fa, fb = self._standard_bounds()
        out = self.mu + self.sigma * ndtri(fa + p * (fb - fa))
        # Exact endpoints; ndtri(ndtr(x)) can be off in the last ulps.
        out = np.where(p == 0, self.a, np.where(p == 1, self.b, out))
        out = np.clip(out, self.a, self.b)
        return out if out.ndim else float(out)

    def quantile_deriv(self, p):
        """dQ/dp = 1 / density(Q(p)); bounded on [0,1] since [a,b] is compact."""
        p = np.asarray(p, dtype=float)
        _, _, fa, fb = self._standard_bounds()
        z = ndtri(fa + np.clip(p, 0.0, 1.0) * (fb - fa))
        phi = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
        out = self.sigma * (fb - fa) / phi
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite support with positive probabilities summing to one.

    The quantile is the right-continuous step function of the sorted atoms.
    Used by the enumeration oracles; a single atom doubles as a constant
    claim (its quantile is differentiable with slope zero).
    """

    values: np.ndarray
    probs: np.ndarray

    def __init__(self, atoms):
        pairs = [(float(v), float(w)) for v, w in atoms]
        if not pairs:
            raise ValueError("need at least one atom")
        pairs.sort(key=lambda vw: vw[0])
        values = np.array([v for v, _ in pairs])
        probs = np.array([w for _, w in pairs])
        if np.any(probs <= 0):
            raise ValueError("atom probabilities must be positive")
        if abs(math.fsum(probs) - 1.0) > 1e-12:
            raise ValueError("atom probabilities must sum to 1")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)
        values.setflags(write=False)
        probs.setflags(write=False)

    @classmethod
    def constant(cls, value: float) -> "DiscreteDistribution":
        return cls([(value, 1.0)])

    @classmethod
    def uniform_atoms(cls, values) -> "DiscreteDistribution":
        values = list(values)
        return cls([(v, 1.0 / len(values)) for v in values])

    @property
    def lower(self) -> float:
        return float(self.values[0])

    @property
    def upper(self) -> float:
        return float(self.values[-1])

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        if np.any(p < 0) or np.any(p > 1):
            raise ValueError("probability outside [0, 1]")
        cum = np.cumsum(self.probs)
        # Right-continuous inverse: smallest atom whose cumulative prob exceeds p.
        idx = np.searchsorted(cum, p, side="right")
        idx = np.minimum(idx, self.values.size - 1)
        out = self.values[idx]
        return out if out.ndim else float(out)

    def quantile_deriv(self, p):
        if self.values.size != 1:
            raise ValueError("a discrete quantile with several atoms is not differentiable")
        p = np.asarray(p, dtype=float)
        out = np.zeros_like(p)
        return out if out.ndim else float(out)
