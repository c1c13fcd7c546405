"""Optimal terminal-wealth quantiles under ambiguity about an exogenous claim.

The library solves a static quantile-optimization problem: maximize a blend
of worst- and best-case expected utility over all joint laws of wealth with
a claim of known marginal distribution, subject to a pricing-kernel budget.
The optimum is characterized by a one-dimensional complementarity system
that `solver.solve` handles by an exact active-set sweep; `oracle` holds
independent brute-force verifiers.
"""

from .budget import BudgetCurve, UnattainableBudgetError, budget_curve, lambda_of_x, x_of_lambda
from .config import ConfigError, SolveConfig
from .distributions import (DiscreteDistribution, LognormalKernel,
                            TruncatedNormalClaim, UniformClaim,
                            probability_grid)
from .objective import GridQuantile, RobustObjective
from .oracle import (CouplingProblem, DirectProblem, coupling_value,
                     direct_solve, pava_project, rearrangement_extremes,
                     step_quantile)
from .payoff import PayoffProfile, default_rho_grid, distribution_check, profile
from .solver import (ResidualReport, SolveResult, SolverConvergenceError,
                     obstacle_base, price_of_quantile, residuals, solve,
                     zero_region_end)
from .utility import UtilitySpec

__all__ = [
    "BudgetCurve", "ConfigError", "CouplingProblem", "DirectProblem",
    "DiscreteDistribution", "GridQuantile", "LognormalKernel",
    "PayoffProfile", "ResidualReport", "RobustObjective", "SolveConfig",
    "SolveResult", "SolverConvergenceError", "TruncatedNormalClaim",
    "UnattainableBudgetError", "UniformClaim", "UtilitySpec", "budget_curve",
    "coupling_value", "default_rho_grid", "direct_solve",
    "distribution_check", "lambda_of_x", "obstacle_base", "pava_project",
    "price_of_quantile", "probability_grid", "profile",
    "rearrangement_extremes", "residuals", "solve", "step_quantile",
    "x_of_lambda", "zero_region_end",
]

__version__ = "0.1.0"
