"""Independent brute-force verifiers.

Three routes that avoid the solver's machinery entirely:

* permutation enumeration of couplings for the rearrangement extremes and
  for the ambiguity-weighted value of discrete positions (exact, n <= 8);
* Euclidean projection onto the non-decreasing cone (pool adjacent
  violators), the building block of
* a direct discretized maximizer of the constrained concave program by
  projected gradient ascent with the budget restored through bisection on
  the multiplier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .distributions import DiscreteDistribution, LognormalKernel, probability_grid
from .objective import GridQuantile, RobustObjective
from scipy.special import ndtri

MAX_ATOMS = 8


@dataclass(frozen=True)
class CouplingProblem:
    """Two equal-length uniform-weight supports; couplings = permutations."""

    x_atoms: tuple
    y_atoms: tuple

    def __init__(self, x_atoms, y_atoms):
        x_atoms = tuple(float(v) for v in x_atoms)
        y_atoms = tuple(float(v) for v in y_atoms)
        if len(x_atoms) != len(y_atoms) or not x_atoms:
            raise ValueError("need equal-length non-empty atom lists")
        if len(x_atoms) > MAX_ATOMS:
            raise ValueError(f"enumeration is limited to {MAX_ATOMS} atoms")
        object.__setattr__(self, "x_atoms", x_atoms)
        object.__setattr__(self, "y_atoms", y_atoms)


def rearrangement_extremes(problem: CouplingProblem) -> tuple[float, float]:
    """(min, max) of E[XY] over all couplings, by full enumeration.

    math.fsum keeps the sums exactly rounded, so the enumerated extremes
    equal the sorted-pairing values bit for bit.
    """
    n = len(problem.x_atoms)
    lo = math.inf
    hi = -math.inf
    for perm in permutations(problem.y_atoms):
        v = math.fsum(x * y for x, y in zip(problem.x_atoms, perm)) / n
        lo = min(lo, v)
        hi = max(hi, v)
    return lo, hi


def comonotone_pairing_value(problem: CouplingProblem) -> float:
    xs = sorted(problem.x_atoms)
    ys = sorted(problem.y_atoms)
    return math.fsum(x * y for x, y in zip(xs, ys)) / len(xs)


def anticomonotone_pairing_value(problem: CouplingProblem) -> float:
    xs = sorted(problem.x_atoms)
    ys = sorted(problem.y_atoms, reverse=True)
    return math.fsum(x * y for x, y in zip(xs, ys)) / len(xs)


def coupling_value(objective: RobustObjective, wealth_atoms) -> tuple[float, float, float]:
    """(worst, best, blended) expected utility over all couplings of wealth
    with a discrete claim of equal atom count.

    The worst case is attained by the comonotone coupling and the best case
    by the anti-comonotone one; the blend weighs them (1-alpha, alpha).
    """
    claim = objective.claim
    if not isinstance(claim, DiscreteDistribution):
        raise ValueError("coupling enumeration needs a discrete claim")
    n = claim.values.size
    if n > MAX_ATOMS:
        raise ValueError(f"enumeration is limited to {MAX_ATOMS} atoms")
    if not np.allclose(claim.probs, 1.0 / n):
        raise ValueError("coupling enumeration needs uniform atom weights")
    wealth_atoms = [float(v) for v in wealth_atoms]
    if len(wealth_atoms) != n:
        raise ValueError("wealth and claim need equally many atoms")

    u = objective.utility.u
    worst = math.inf
    best = -math.inf
    for perm in permutations(claim.values):
        v = math.fsum(float(u(x + y)) for x, y in zip(wealth_atoms, perm)) / n
        worst = min(worst, v)
        best = max(best, v)
    return worst, best, (1.0 - objective.alpha) * worst + objective.alpha * best


def step_quantile(atoms) -> GridQuantile:
    """Right-continuous quantile of n equally likely atoms as a GridQuantile."""
    atoms = np.sort(np.asarray(atoms, dtype=float))
    n = atoms.size
    grid = np.concatenate([[0.5 / n], np.arange(1, n) / n])
    return GridQuantile(grid, atoms, kind="step")


def _pava_core(y, w):
    n = y.size
    means = np.empty(n)
    wsums = np.empty(n)
    counts = np.empty(n, dtype=np.int64)
    top = 0
    for i in range(n):
        cur_mean = y[i]
        cur_w = w[i]
        cur_n = 1
        while top > 0 and means[top - 1] > cur_mean:
            top -= 1
            tot = wsums[top] + cur_w
            cur_mean = (wsums[top] * means[top] + cur_w * cur_mean) / tot
            cur_w = tot
            cur_n += counts[top]
        means[top] = cur_mean
        wsums[top] = cur_w
        counts[top] = cur_n
        top += 1
    out = np.empty(n)
    pos = 0
    for b in range(top):
        for _ in range(counts[b]):
            out[pos] = means[b]
            pos += 1
    return out


try:  # the projection sits in the direct solver's innermost loop
    from numba import njit

    _pava_fast = njit(cache=True)(_pava_core)
except Exception:  # pragma: no cover - numba is optional
    _pava_fast = _pava_core


def pava_project(values, weights=None) -> np.ndarray:
    """Weighted Euclidean projection onto the non-decreasing cone.

    Classic pool-adjacent-violators; idempotent and (weighted-)mean
    preserving.
    """
    y = np.ascontiguousarray(values, dtype=float)
    if y.ndim != 1 or y.size == 0:
        raise ValueError("need a non-empty 1-d array")
    if weights is None:
        w = np.ones_like(y)
    else:
        w = np.ascontiguousarray(weights, dtype=float)
        if w.shape != y.shape or np.any(w <= 0):
            raise ValueError("weights must be positive and match values")
    return _pava_fast(y, w)


def price_coefficients(kernel: LognormalKernel, p: np.ndarray) -> np.ndarray:
    """Node weights c with int_0^1 Q(p) Q_rho(1-p) dp = c . values for the
    piecewise-linear interpolant with flat extensions beyond the grid.

    Cells integrate by Gauss-Legendre in the normal score (see
    solver.price_of_quantile); the two tails are closed-form.
    """
    p = np.asarray(p, dtype=float)
    n = p.size
    coeffs = np.zeros(n)
    z = ndtri(1.0 - p)

    # hat-function weights: every Gauss node in a cell spreads its quadrature
    # weight linearly between the cell's two endpoints
    from scipy.special import ndtr
    from .solver import _GL_NODES, _GL_WEIGHTS

    z_hi, z_lo = z[:-1], z[1:]
    half = 0.5 * (z_hi - z_lo)
    mid = 0.5 * (z_hi + z_lo)
    zg = mid[:, None] + half[:, None] * _GL_NODES
    pg = 1.0 - ndtr(zg)
    density = kernel.mean() * np.exp(-0.5 * (zg - kernel.sigma_log) ** 2) / math.sqrt(2 * math.pi)
    wq = half[:, None] * _GL_WEIGHTS * density
    t = np.clip((pg - p[:-1, None]) / np.diff(p)[:, None], 0.0, 1.0)
    np.add.at(coeffs, np.arange(n - 1), np.sum(wq * (1.0 - t), axis=1))
    np.add.at(coeffs, np.arange(1, n), np.sum(wq * t, axis=1))

    coeffs[0] += kernel.mean() - kernel.lower_partial_mean(1.0 - p[0])
    coeffs[-1] += kernel.lower_partial_mean(1.0 - p[-1])
    return coeffs


@dataclass(frozen=True)
class DirectProblem:
    """Budget-constrained concave maximization on a fixed grid."""

    objective: RobustObjective
    kernel: LognormalKernel
    x: float
    m: int = 240
    eps_p: float = 1e-6

    def __post_init__(self):
        if self.m < 50:
            raise ValueError("direct grid needs at least 50 cells")
        if self.x <= 0:
            raise ValueError("budget must be positive")


class DirectSolveError(RuntimeError):
    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


def direct_solve(problem: DirectProblem, max_iter: int = 100_000,
                 tol_budget: float = 1e-8):
    """Maximize sum_i w_i V(q_i, p_i) s.t. price(q) = x over the monotone
    nonnegative cone, without using the solver's candidate construction.

    Inner loop at fixed multiplier: projected gradient ascent, steps on
    dV/dx - lam * Q_rho(1-p), projection by pool-adjacent-violators and a
    floor at zero, backtracking line search halving from 1.  Outer loop:
    bisection on the multiplier until the priced budget matches x to
    tol_budget * max(1, x).  Stationarity is measured by the unit-step
    projected displacement, which bounds the attainable objective
    improvement.  Returns (GridQuantile, objective value).
    """
    obj, kernel = problem.objective, problem.kernel
    p = probability_grid(problem.m, problem.eps_p)
    w = np.full(p.size, p[1] - p[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    price_w = price_coefficients(kernel, p)
    # per-node price in the nodal metric, so the gradient matches the priced
    # Lagrangian exactly (a raw Q_rho(1-p_i) disagrees in the endpoint cells)
    kq = price_w / w
    grad_scale = max(1.0, obj.utility.marginal_utility_bound(obj.claim.lower))

    iterations = 0

    def lagrangian(q, lam):
        return float(np.sum(w * obj.V(q, p)) - lam * float(price_w @ q))

    def inner(q, lam, sweeps, stat_tol):
        """Diagonally scaled projected gradient ascent.

        The gradient step is scaled by 1/|V_xx| and the cone projection is
        the PAVA projection in the matching metric; without the scaling the
        step count blows up like the curvature ratio exp(gamma * range).
        Terminates when the unit-step projected displacement (zero exactly
        at the constrained maximizer) falls below stat_tol.
        """
        nonlocal iterations
        step = 1.0
        value = lagrangian(q, lam)
        # float-noise allowance: near the maximizer the curvature-matched
        # unit step is a contraction, but its objective gain drops below
        # double precision; rejecting those steps would freeze the iterate
        # at ~sqrt(eps) accuracy.
        for _ in range(sweeps):
            iterations += 1
            if iterations > max_iter:
                raise DirectSolveError("iteration cap exceeded",
                                       last_iterate=GridQuantile(p, q))
            curv = -obj.V_x(q, p, 2)
            curv = np.maximum(curv, 1e-12 * float(np.max(curv)))
            metric = w * curv
            direction = (obj.V_x(q, p, 1) - lam * kq) / curv
            unit = np.maximum(pava_project(q + direction, metric), 0.0)
            fixed_point_gap = np.max(np.abs(unit - q))
            if fixed_point_gap <= stat_tol:
                break
            slack = 64.0 * np.finfo(float).eps * max(1.0, abs(value))
            step = min(1.0, 2.0 * step)
            accepted = False
            while step > 1e-16:
                trial = unit if step == 1.0 else np.maximum(
                    pava_project(q + step * direction, metric), 0.0)
                trial_value = lagrangian(trial, lam)
                if trial_value >= value - slack:
                    if np.array_equal(trial, q):
                        return q
                    q, value = trial, trial_value
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                break
        return q

    def solved_budget(lam, q_start, stat_tol, sweeps=20_000):
        q_new = inner(q_start, lam, sweeps, stat_tol)
        return q_new, float(price_w @ q_new)

    bound = obj.utility.marginal_utility_bound(obj.claim.lower)
    lam_lo, lam_hi = 1e-6 * bound, 1e6 * bound
    q0 = np.full(p.size, problem.x / max(price_w.sum(), 1e-300))
    coarse = 1e-6 * grad_scale

    q_lo, b_lo = solved_budget(lam_lo, q0, coarse)
    for _ in range(8):
        if b_lo >= problem.x:
            break
        lam_lo /= 1e4
        q_lo, b_lo = solved_budget(lam_lo, q_lo, coarse)
    q_hi, b_hi = solved_budget(lam_hi, q0, coarse)
    for _ in range(8):
        if b_hi <= problem.x:
            break
        lam_hi *= 1e4
        q_hi, b_hi = solved_budget(lam_hi, q_hi, coarse)
    if not (b_hi <= problem.x <= b_lo):
        raise DirectSolveError("budget outside the bracketed range")

    q = q_lo
    for _ in range(300):
        lam_mid = math.sqrt(lam_lo * lam_hi)
        width = lam_hi / lam_lo - 1.0
        stat_tol = grad_scale * min(1e-6, max(1e-12, 1e-3 * width))
        q, b_mid = solved_budget(lam_mid, q, stat_tol)
        if abs(b_mid - problem.x) <= tol_budget * max(1.0, problem.x):
            break
        if b_mid >= problem.x:
            lam_lo = lam_mid
        else:
            lam_hi = lam_mid
        if width < 1e-14:
            raise DirectSolveError("multiplier bisection stalled",
                                   last_iterate=GridQuantile(p, q))
    else:
        raise DirectSolveError("multiplier bisection did not converge",
                               last_iterate=GridQuantile(p, q))

    q = inner(q, lam_mid, 20_000, 1e-12 * grad_scale)
    value = float(np.sum(w * obj.V(q, p)))
    return GridQuantile(p, np.maximum.accumulate(np.maximum(q, 0.0))), value
