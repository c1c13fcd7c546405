"""Brute-force verification: enumeration, projection, and a direct maximizer.

Everything the solver produces can be checked by machinery that shares none
of its code path: couplings of small discrete laws are enumerable, the
monotone projection has an exhaustive quadratic-programming counterpart, and
the full problem can be maximized directly by projected gradient ascent.
"""

import numpy as np

from claimquant import (CouplingProblem, DirectProblem, DiscreteDistribution,
                        GridQuantile, LognormalKernel, RobustObjective,
                        UniformClaim, UtilitySpec, coupling_value, direct_solve,
                        pava_project, rearrangement_extremes, solve,
                        step_quantile)

lo, hi = rearrangement_extremes(CouplingProblem([1, 2], [0, 1]))
print("E[XY] extremes over couplings of {1,2} with {0,1}:", (lo, hi))

util = UtilitySpec([0.5, 0.5], [1.0, 2.0])
claim = DiscreteDistribution.uniform_atoms([0.2, 0.8, 1.5, 1.9])
objective = RobustObjective(0.6, claim, util)
wealth = [0.1, 0.4, 1.0, 2.2]
worst, best, blended = coupling_value(objective, wealth)
print("\nenumerated worst/best expected utility:", (round(worst, 8), round(best, 8)))
print("blend vs exact quantile integral:",
      blended, objective.J_alpha(step_quantile(wealth)))

print("\nmonotone projection pools adjacent violators:")
print(pava_project([3.0, 1.0, 2.0, 5.0, 4.0, 4.5]))

kernel = LognormalKernel(r=0.02, theta=0.25, T=1.0)
zero_claim = RobustObjective(0.0, DiscreteDistribution.constant(0.0),
                             UtilitySpec([1.0], [1.0]))
vi = solve(zero_claim, kernel, 0.8, n_cells=2000)
direct_q, direct_value = direct_solve(
    DirectProblem(zero_claim, kernel, vi.budget, m=300))
on_grid = GridQuantile(vi.p, np.maximum.accumulate(
    np.interp(vi.p, direct_q.p, direct_q.values)))
print("\nsolver objective:", zero_claim.J_alpha(vi.quantile()))
print("direct-maximizer objective:", zero_claim.J_alpha(on_grid))
mask = (vi.p > vi.pbar + 0.02) & (vi.p < 0.98)
print("sup-norm gap away from the flat start:",
      float(np.max(np.abs(vi.q[mask] - on_grid.values[mask]))))
