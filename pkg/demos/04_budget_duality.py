"""The endowment/multiplier correspondence x(lambda) and its inversion."""

import numpy as np

from claimquant import (LognormalKernel, RobustObjective, UniformClaim,
                        UtilitySpec, budget_curve, lambda_of_x, x_of_lambda)

kernel = LognormalKernel(r=0.02, theta=0.25, T=1.0)
objective = RobustObjective(0.25, UniformClaim(2.0),
                            UtilitySpec([950.0, 950.0], [0.010, 0.012]))

curve = budget_curve(objective, kernel, np.geomspace(0.2, 40, 10), n_cells=1200)
print("lambda        x(lambda)")
for lam, x in zip(curve.lam, curve.x):
    print(f"{lam:10.4f} {x:12.6f}")
print("strictly decreasing:", bool(np.all(np.diff(curve.x) < 0)))

print("\nround trips through the inverse map:")
for x in (0.17, 6.26, 7.66, 9.72, 15.17):
    lam = lambda_of_x(objective, kernel, x, n_cells=1200)
    back = x_of_lambda(objective, kernel, lam, n_cells=1200)
    print(f"  x={x:6.2f} -> lambda={lam:10.6f} -> x={back:.8f}")
