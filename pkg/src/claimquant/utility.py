"""Mixtures of exponential utilities and their derivatives.

The preference model is u(x) = -sum_i c_i * exp(-gamma_i * x) with positive
weights c_i and positive curvature rates gamma_i.  Everything downstream
(the robust integrand, its inversion, the solver) leans on two facts: the
k-th derivative is (-1)^(k+1) * sum_i c_i gamma_i^k exp(-gamma_i x), and any
level equation sum_i k_i exp(-gamma_i x) = w is a monotone one-dimensional
root problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def logsumexp_last(a: np.ndarray) -> np.ndarray:
    """log(sum(exp(a), axis=-1)) with the usual max shift.

    Hand-rolled because scipy's version carries ~100us of dispatch overhead
    per call, which dominates the solver's scalar block-root solves.
    """
    m = np.max(a, axis=-1, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        return np.log(np.sum(np.exp(a - m), axis=-1)) + np.squeeze(m, axis=-1)


@dataclass(frozen=True)
class UtilitySpec:
    """Finite mixture -sum c_i exp(-gamma_i x); immutable and thread-safe."""

    c: np.ndarray
    gamma: np.ndarray

    def __init__(self, c, gamma):
        c = np.atleast_1d(np.asarray(c, dtype=float))
        gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
        if c.ndim != 1 or gamma.ndim != 1 or c.size != gamma.size or c.size == 0:
            raise ValueError("c and gamma must be equal-length non-empty 1-d sequences")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(gamma))):
            raise ValueError("utility parameters must be finite")
        if np.any(c <= 0) or np.any(gamma <= 0):
            raise ValueError("utility weights and rates must be strictly positive")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "gamma", gamma)
        c.setflags(write=False)
        gamma.setflags(write=False)

    @property
    def n_terms(self) -> int:
        return self.c.size

    def u(self, x):
        """Utility value, always negative; saturates to -inf instead of overflowing."""
        x = np.asarray(x, dtype=float)
        log_terms = np.log(self.c) - np.multiply.outer(x, self.gamma)
        with np.errstate(over="ignore"):
            out = -np.exp(logsumexp_last(log_terms))
        return out if out.ndim else float(out)

    def u_deriv(self, x, k: int = 1):
        """k-th derivative; sign is (-1)^(k+1), magnitude saturates to inf."""
        if k < 1 or k != int(k):
            raise ValueError("derivative order k must be a positive integer")
        x = np.asarray(x, dtype=float)
        log_terms = np.log(self.c) + k * np.log(self.gamma) - np.multiply.outer(x, self.gamma)
        sign = 1.0 if k % 2 == 1 else -1.0
        with np.errstate(over="ignore"):
            out = sign * np.exp(logsumexp_last(log_terms))
        return out if out.ndim else float(out)

    def marginal_utility_bound(self, floor: float) -> float:
        """u'(floor): the largest marginal utility on wealth >= floor."""
        return float(self.u_deriv(floor, 1))


def solve_exp_sum_scalar(log_coeff, gamma, log_target: float,
                         tol: float = 1e-13, max_iter: int = 80) -> float:
    """Scalar twin of solve_exp_sum, used in the solver's block merges.

    Plain-float arithmetic: the array version's broadcasting costs ~50x more
    per call, which dominates heavily ironed solves (thousands of merges).
    """
    pairs = [(lc, g) for lc, g in zip(log_coeff, gamma) if lc > -math.inf]
    hi = min((log_target - lc) / g for lc, g in pairs)
    lo = hi - math.log(len(gamma)) / min(g for _, g in pairs) - 1e-12
    s = 0.5 * (lo + hi)
    for _ in range(max_iter):
        top = max(lc + g * s for lc, g in pairs)
        terms = [(math.exp(lc + g * s - top), g) for lc, g in pairs]
        total = sum(t for t, _ in terms)
        fval = top + math.log(total) - log_target
        if abs(fval) <= tol:
            break
        if fval < 0:
            lo = s
        else:
            hi = s
        fprime = sum(t * g for t, g in terms) / total
        s_new = s - fval / fprime
        if not lo < s_new < hi:
            s_new = 0.5 * (lo + hi)
        s = s_new
    return s


def solve_exp_sum(log_coeff: np.ndarray, gamma: np.ndarray, log_target: np.ndarray,
                  tol: float = 1e-13, max_iter: int = 80) -> np.ndarray:
    """Solve sum_j exp(log_coeff_j + gamma_j * s) = exp(log_target) for s, elementwise.

    log_coeff has shape (..., m) aligned with gamma (m,), log_target (...,).
    f(s) = logsumexp_j(log_coeff_j + gamma_j s) is convex and strictly increasing
    with slope in [gamma_min, gamma_max], so safeguarded Newton converges from
    any bracket.  Terms with log_coeff = -inf are allowed (zero coefficients).
    """
    log_coeff = np.asarray(log_coeff, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    log_target = np.asarray(log_target, dtype=float)
    m = gamma.size

    # Per-term exact solutions bracket the root of the sum.
    with np.errstate(invalid="ignore"):
        s_terms = (log_target[..., None] - log_coeff) / gamma
    s_terms = np.where(np.isfinite(log_coeff), s_terms, np.inf)
    hi = np.min(s_terms, axis=-1) + 0.0          # f(hi) >= log_target
    lo = hi - np.log(m) / np.min(gamma) - 1e-12  # f(lo) <= log_target

    s = 0.5 * (lo + hi)
    shape = np.broadcast(log_target, s).shape
    s = np.broadcast_to(s, shape).copy()
    lo = np.broadcast_to(lo, shape).copy()
    hi = np.broadcast_to(hi, shape).copy()
    target = np.broadcast_to(log_target, shape)

    active = np.ones(shape, dtype=bool)
    for _ in range(max_iter):
        terms = log_coeff + np.multiply.outer(s, gamma)
        lse = logsumexp_last(terms)
        fval = lse - target
        # Normalized weights give f'(s) as a convex combination of the gammas.
        weights = np.exp(terms - lse[..., None])
        fprime = weights @ gamma
        done = np.abs(fval) <= tol
        active &= ~done
        if not np.any(active):
            break
        lo = np.where(active & (fval < 0), s, lo)
        hi = np.where(active & (fval > 0), s, hi)
        step = np.where(fprime > 0, fval / np.where(fprime > 0, fprime, 1.0), 0.0)
        s_new = s - step
        bad = (s_new <= lo) | (s_new >= hi) | ~np.isfinite(s_new)
        s_new = np.where(bad, 0.5 * (lo + hi), s_new)
        s = np.where(active, s_new, s)
    return s
