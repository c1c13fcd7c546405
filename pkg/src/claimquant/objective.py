"""The ambiguity-weighted integrand V, its inversion, and the payoff functional.

V(x, p) = (1-alpha) u(x + Q_claim(p)) + alpha u(x + Q_claim(1-p)) blends the
worst-case coupling of wealth with the claim (comonotone, weight 1-alpha)
and the best case (anti-comonotone, weight alpha).  The objective on wealth
quantiles is J_alpha(Q) = integral_0^1 V(Q(p), p) dp.

S_inverse inverts x -> dV/dx(x, p) at a given marginal-utility level; for the
exponential mixture this is a monotone sum-of-exponentials equation solved in
log space (see utility.solve_exp_sum).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import DiscreteDistribution
from .utility import UtilitySpec, solve_exp_sum


def _log_weight_pair(alpha: float):
    """(log(1-alpha), log(alpha)) without RuntimeWarnings at the endpoints."""
    log_w1 = np.log1p(-alpha) if alpha < 1.0 else -np.inf
    log_w2 = np.log(alpha) if alpha > 0.0 else -np.inf
    return log_w1, log_w2


@dataclass(frozen=True)
class GridQuantile:
    """Nonnegative non-decreasing values on a strictly increasing p-grid.

    kind = "linear" interpolates piecewise linearly (the solver's convention);
    kind = "step" is the right-continuous step function of the grid values.
    """

    p: np.ndarray
    values: np.ndarray
    kind: str = "linear"

    def __init__(self, p, values, kind: str = "linear"):
        p = np.asarray(p, dtype=float)
        values = np.asarray(values, dtype=float)
        if p.ndim != 1 or p.shape != values.shape or p.size < 2:
            raise ValueError("p and values must be matching 1-d arrays with >= 2 points")
        if np.any(p <= 0) or np.any(p >= 1) or np.any(np.diff(p) <= 0):
            raise ValueError("grid must be strictly increasing inside (0, 1)")
        if kind not in ("linear", "step"):
            raise ValueError("kind must be 'linear' or 'step'")
        # 1e-12 of slack absorbs floating-point jitter, anything more is a bug.
        if np.any(np.diff(values) < -1e-12) or np.any(values < -1e-12):
            raise ValueError("quantile values must be nonnegative and non-decreasing")
        values = np.maximum.accumulate(np.maximum(values, 0.0))
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "kind", kind)
        p.setflags(write=False)
        values.setflags(write=False)

    def __call__(self, q):
        q = np.asarray(q, dtype=float)
        if self.kind == "linear":
            out = np.interp(q, self.p, self.values)
        else:
            idx = np.searchsorted(self.p, q, side="right")
            idx = np.clip(idx - 1, 0, self.values.size - 1)
            out = self.values[idx]
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class RobustObjective:
    """Bundles the ambiguity attitude, the claim law, and the utility."""

    alpha: float
    claim: object
    utility: UtilitySpec

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("ambiguity attitude alpha must lie in [0, 1]")

    # -- pointwise integrand -------------------------------------------------

    def _shifts(self, p):
        p = np.asarray(p, dtype=float)
        return self.claim.quantile(p), self.claim.quantile(1.0 - p)

    def V(self, x, p):
        """(1-alpha) u(x + Q_claim(p)) + alpha u(x + Q_claim(1-p)); negative."""
        a_shift, b_shift = self._shifts(p)
        u = self.utility.u
        return (1.0 - self.alpha) * u(np.asarray(x) + a_shift) + self.alpha * u(
            np.asarray(x) + b_shift
        )

    def V_x(self, x, p, k: int = 1):
        """k-th x-derivative of V; positive for odd k, negative for even k."""
        a_shift, b_shift = self._shifts(p)
        ud = self.utility.u_deriv
        return (1.0 - self.alpha) * ud(np.asarray(x) + a_shift, k) + self.alpha * ud(
            np.asarray(x) + b_shift, k
        )

    def V_xp(self, x, p):
        """Mixed derivative d2V/dxdp; needs a differentiable claim quantile."""
        p = np.asarray(p, dtype=float)
        a_shift, b_shift = self._shifts(p)
        da = self.claim.quantile_deriv(p)
        db = self.claim.quantile_deriv(1.0 - p)
        ud = self.utility.u_deriv
        x = np.asarray(x)
        return (1.0 - self.alpha) * ud(x + a_shift, 2) * da - self.alpha * ud(
            x + b_shift, 2
        ) * db

    # -- inversion -----------------------------------------------------------

    def log_mix_coeffs(self, p):
        """log K_j(p) with dV/dx(x, p) = sum_j K_j(p) exp(-gamma_j x).

        Shape (..., n_terms); the building block for S_inverse and the
        solver's pooled-block equations.
        """
        a_shift, b_shift = self._shifts(p)
        gamma = self.utility.gamma
        log_w1, log_w2 = _log_weight_pair(self.alpha)
        t1 = log_w1 - np.multiply.outer(np.asarray(a_shift, dtype=float), gamma)
        t2 = log_w2 - np.multiply.outer(np.asarray(b_shift, dtype=float), gamma)
        mix = np.logaddexp(t1, t2)
        return np.log(self.utility.c * gamma) + mix

    def S_inverse(self, w, p):
        """The unique xi with dV/dx(xi, p) = w; strictly decreasing in w."""
        w = np.asarray(w, dtype=float)
        if np.any(w <= 0):
            raise ValueError("marginal-utility level w must be positive (dV/dx > 0)")
        log_k = self.log_mix_coeffs(p)
        s = solve_exp_sum(log_k, self.utility.gamma, np.log(w))
        out = -s
        return out if out.ndim else float(out)

    def L_operator(self, w, p):
        """d2V/dxdp evaluated at wealth S_inverse(w, p)."""
        xi = self.S_inverse(w, p)
        return self.V_xp(xi, p)

    # -- the payoff functional -----------------------------------------------

    def J_alpha(self, quantile: GridQuantile) -> float:
        """integral_0^1 V(Q(p), p) dp for a grid quantile.

        Continuous claims: composite trapezoid on the quantile's own grid.
        Discrete claims require a step quantile and are integrated exactly
        cell by cell (the integrand is piecewise constant).
        """
        if isinstance(self.claim, DiscreteDistribution) and self.claim.values.size > 1:
            if quantile.kind != "step":
                raise ValueError("a discrete claim needs a step quantile for J_alpha")
            return self._j_alpha_step(quantile)
        p = quantile.p
        vals = self.V(quantile.values, p)
        total = float(np.trapezoid(vals, p))
        # flat-extension tails of the clipped grid (midpoint rule; the
        # integrand is continuous in p up to the endpoints for bounded claims)
        total += p[0] * float(self.V(quantile.values[0], 0.5 * p[0]))
        total += (1.0 - p[-1]) * float(self.V(quantile.values[-1], 0.5 * (1.0 + p[-1])))
        return total

    def _j_alpha_step(self, quantile: GridQuantile) -> float:
        cum = np.cumsum(self.claim.probs)[:-1]
        breaks = np.unique(
            np.concatenate([[0.0, 1.0], quantile.p, cum, 1.0 - cum, 1.0 - quantile.p])
        )
        breaks = breaks[(breaks >= 0.0) & (breaks <= 1.0)]
        mid = 0.5 * (breaks[:-1] + breaks[1:])
        widths = np.diff(breaks)
        return float(np.sum(widths * self.V(quantile(mid), mid)))
