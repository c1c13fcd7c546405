"""Walk through the distribution layer: the pricing kernel and claim models.

The market enters through a lognormal pricing kernel rho: a cheap state is
one where rho is small.  The claim only enters through its quantile
function, which is all the optimizer ever needs.
"""

import numpy as np

from claimquant import (DiscreteDistribution, LognormalKernel,
                        TruncatedNormalClaim, UniformClaim)

kernel = LognormalKernel(r=0.02, theta=0.25, T=1.0)
print("pricing kernel: mu_log =", kernel.mu_log, " sigma_log =", kernel.sigma_log)
print("E[rho] = exp(-rT) =", kernel.mean())

p = np.array([0.01, 0.25, 0.5, 0.75, 0.99])
print("\n p      Q_rho(p)    F(Q_rho(p))")
for pi, qi in zip(p, kernel.quantile(p)):
    print(f"{pi:5.2f} {qi:10.6f} {kernel.cdf(qi):12.6f}")

# the mean identity is a quadrature statement about the quantile
grid = np.linspace(1e-6, 1 - 1e-6, 200001)
print("\ntrapezoid of Q_rho over (0,1):", np.trapezoid(kernel.quantile(grid), grid),
      "(tails clipped)  vs  exp(-rT):", kernel.mean())

print("\nclaims share one interface: quantile, slope, support bounds")
for claim in (UniformClaim(2.0),
              TruncatedNormalClaim(1.0, 0.5, 0.0, 2.0),
              DiscreteDistribution.uniform_atoms([0.2, 0.9, 1.7])):
    name = type(claim).__name__
    qs = claim.quantile(np.array([0.1, 0.5, 0.9]))
    print(f"{name:>22}: support [{claim.lower}, {claim.upper}] "
          f"quantiles {np.round(qs, 4)}")
