"""The endowment <-> multiplier correspondence.

x(lam) = int_0^1 Q_lam(p) Q_rho(1-p) dp is continuous and strictly
decreasing (a smaller multiplier makes wealth cheaper pointwise), so the
inverse lam(x) is found by bisection in log lam on an automatically expanded
bracket.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .distributions import LognormalKernel
from .objective import RobustObjective
from . import solver as _solver


class UnattainableBudgetError(ValueError):
    """The requested endowment is outside the numerically reachable range."""


@dataclass(frozen=True)
class BudgetCurve:
    """Sampled (lam, x) pairs, sorted by lam; x is strictly decreasing."""

    lam: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lam", np.asarray(self.lam, dtype=float))
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))


def x_of_lambda(objective: RobustObjective, kernel: LognormalKernel, lam: float,
                **solve_kwargs) -> float:
    """Realized budget of the optimal quantile at multiplier lam."""
    return _solver.solve(objective, kernel, lam, **solve_kwargs).budget


def budget_curve(objective, kernel, lambdas, max_workers: int | None = None,
                 **solve_kwargs) -> BudgetCurve:
    """Sample x(lam) over a multiplier grid; independent solves run in parallel."""
    lambdas = np.sort(np.asarray(lambdas, dtype=float))
    if np.any(lambdas <= 0):
        raise ValueError("multiplier grid must be positive")
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        xs = list(pool.map(lambda lv: x_of_lambda(objective, kernel, lv, **solve_kwargs),
                           lambdas))
    return BudgetCurve(lambdas, np.asarray(xs))


def lambda_of_x(objective: RobustObjective, kernel: LognormalKernel, x: float,
                rel_tol: float = 1e-12, **solve_kwargs) -> float:
    """The multiplier whose optimal solve prices exactly to the endowment x.

    Bisection in log lam, initial bracket [1e-6, 1e6] * u'(claim floor),
    expanded outward if needed.  The bracket is shrunk to relative width
    rel_tol so repeated inversions are reproducible to the last digits; the
    realized budget is checked against 1e-6 * max(1, x) on exit.
    """
    if not (x > 0 and math.isfinite(x)):
        raise UnattainableBudgetError("endowment x must be positive and finite")

    scale = objective.utility.marginal_utility_bound(objective.claim.lower)

    def budget_at(lam):
        return x_of_lambda(objective, kernel, lam, **solve_kwargs)

    lo, hi = 1e-6 * scale, 1e6 * scale  # x(lo) large, x(hi) ~ 0
    for _ in range(8):
        if budget_at(lo) >= x:
            break
        lo /= 1e4
    else:
        raise UnattainableBudgetError(f"budget {x} above the reachable range")
    for _ in range(8):
        if budget_at(hi) <= x:
            break
        hi *= 1e4
    else:
        raise UnattainableBudgetError(f"budget {x} below the reachable range")

    log_lo, log_hi = math.log(lo), math.log(hi)
    for _ in range(200):
        if log_hi - log_lo <= rel_tol:
            break
        mid = 0.5 * (log_lo + log_hi)
        if budget_at(math.exp(mid)) >= x:
            log_lo = mid
        else:
            log_hi = mid
    lam = math.exp(0.5 * (log_lo + log_hi))
    realized = budget_at(lam)
    if abs(realized - x) > 1e-6 * max(1.0, abs(x)):
        raise UnattainableBudgetError(
            f"bisection stalled: realized budget {realized} vs requested {x}")
    return lam
