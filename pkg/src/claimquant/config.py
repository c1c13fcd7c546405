"""Structured solve configuration: parsing, validation, model construction.

Configs are YAML documents with nested sections (market, claim, utility,
alpha, budget xor multiplier, numerics, output).  All numbers are plain
decimals; parsing is locale independent.  Validation raises ConfigError,
which the CLI maps to exit code 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import yaml

from .distributions import (DiscreteDistribution, LognormalKernel,
                            TruncatedNormalClaim, UniformClaim)
from .objective import RobustObjective
from .utility import UtilitySpec


class ConfigError(ValueError):
    pass


_NUMERIC_DEFAULTS = {
    "grid_n": 4000,
    "eps_p": 1e-6,
    "tol_obstacle": 1e-6,
    "tol_complementarity": 1e-6,
    "tol_ode": 1e-5,
    "penalty_tol": 1e-4,
    "penalization": False,
}

_OUTPUT_DEFAULTS = {"directory": "out", "format": "csv"}

_CLAIM_KEYS = {
    "uniform": {"y"},
    "truncated_normal": {"mu", "sigma", "a", "b"},
    "constant": {"value"},
}


def _require_keys(section: dict, allowed, name: str, required=None):
    unknown = set(section) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {name}: {sorted(unknown)}")
    for key in required or ():
        if key not in section:
            raise ConfigError(f"missing {name}.{key}")


def _number(section, key, name):
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name}.{key} must be a number")
    return float(value)


@dataclass(frozen=True)
class SolveConfig:
    market: dict
    claim: dict
    utility: dict
    alpha: float
    budget_x: float | None
    multiplier: float | None
    numerics: dict
    output: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict) -> "SolveConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a mapping")
        allowed = {"market", "claim", "utility", "alpha", "budget",
                   "multiplier", "numerics", "output"}
        _require_keys(raw, allowed, "config",
                      required=("market", "claim", "utility", "alpha"))

        market = dict(raw["market"])
        _require_keys(market, {"r", "theta", "T"}, "market", required=("r", "theta", "T"))
        market = {k: _number(market, k, "market") for k in ("r", "theta", "T")}

        claim = dict(raw["claim"])
        kind = claim.get("kind")
        if kind not in _CLAIM_KEYS:
            raise ConfigError(
                f"claim.kind must be one of {sorted(_CLAIM_KEYS)}, got {kind!r}")
        _require_keys(claim, {"kind"} | _CLAIM_KEYS[kind], "claim",
                      required=_CLAIM_KEYS[kind])
        claim = {"kind": kind, **{k: _number(claim, k, "claim") for k in _CLAIM_KEYS[kind]}}

        utility = dict(raw["utility"])
        _require_keys(utility, {"c", "gamma"}, "utility", required=("c", "gamma"))
        for key in ("c", "gamma"):
            seq = utility[key]
            if not isinstance(seq, (list, tuple)) or not seq:
                raise ConfigError(f"utility.{key} must be a non-empty list")
            utility[key] = [float(v) for v in seq]
        if len(utility["c"]) != len(utility["gamma"]):
            raise ConfigError("utility.c and utility.gamma must have equal length")

        alpha = raw["alpha"]
        if isinstance(alpha, bool) or not isinstance(alpha, (int, float)):
            raise ConfigError("alpha must be a number")
        alpha = float(alpha)
        if not 0.0 <= alpha <= 1.0:
            raise ConfigError("alpha must lie in [0, 1]")

        budget_x = None
        multiplier = None
        has_budget = "budget" in raw
        has_multiplier = "multiplier" in raw
        if has_budget == has_multiplier:
            raise ConfigError("exactly one of 'budget' or 'multiplier' must be given")
        if has_budget:
            section = dict(raw["budget"])
            _require_keys(section, {"x"}, "budget", required=("x",))
            budget_x = _number(section, "x", "budget")
            if budget_x <= 0:
                raise ConfigError("budget.x must be positive")
        else:
            section = dict(raw["multiplier"])
            _require_keys(section, {"lambda"}, "multiplier", required=("lambda",))
            multiplier = _number(section, "lambda", "multiplier")
            if multiplier <= 0:
                raise ConfigError("multiplier.lambda must be positive")

        numerics = {**_NUMERIC_DEFAULTS, **dict(raw.get("numerics") or {})}
        _require_keys(numerics, _NUMERIC_DEFAULTS, "numerics")
        if int(numerics["grid_n"]) < 2:
            raise ConfigError("numerics.grid_n must be at least 2")
        numerics["grid_n"] = int(numerics["grid_n"])
        if not isinstance(numerics["penalization"], bool):
            raise ConfigError("numerics.penalization must be a boolean")
        if not 0 < float(numerics["eps_p"]) < 0.5:
            raise ConfigError("numerics.eps_p must lie in (0, 0.5)")

        output = {**_OUTPUT_DEFAULTS, **dict(raw.get("output") or {})}
        _require_keys(output, _OUTPUT_DEFAULTS, "output")
        if output["format"] != "csv":
            raise ConfigError("output.format: only 'csv' is supported")

        return cls(market=market, claim=claim, utility=utility, alpha=alpha,
                   budget_x=budget_x, multiplier=multiplier,
                   numerics=numerics, output=output)

    @classmethod
    def from_yaml(cls, path) -> "SolveConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                raw = yaml.safe_load(fh)
            except yaml.YAMLError as exc:
                raise ConfigError(f"cannot parse {path}: {exc}") from exc
        return cls.from_dict(raw or {})

    def as_dict(self) -> dict:
        """Fully resolved echo; from_dict(as_dict()) reproduces the config."""
        out = {
            "market": dict(self.market),
            "claim": dict(self.claim),
            "utility": {"c": list(self.utility["c"]),
                        "gamma": list(self.utility["gamma"])},
            "alpha": self.alpha,
            "numerics": dict(self.numerics),
            "output": dict(self.output),
        }
        if self.budget_x is not None:
            out["budget"] = {"x": self.budget_x}
        else:
            out["multiplier"] = {"lambda": self.multiplier}
        return out

    # -- model construction --

    def kernel(self) -> LognormalKernel:
        try:
            return LognormalKernel(r=self.market["r"], theta=self.market["theta"],
                                   T=self.market["T"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def claim_model(self):
        c = self.claim
        try:
            if c["kind"] == "uniform":
                return UniformClaim(c["y"])
            if c["kind"] == "truncated_normal":
                return TruncatedNormalClaim(c["mu"], c["sigma"], c["a"], c["b"])
            return DiscreteDistribution.constant(c["value"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def objective(self) -> RobustObjective:
        try:
            utility = UtilitySpec(self.utility["c"], self.utility["gamma"])
            return RobustObjective(self.alpha, self.claim_model(), utility)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def solve_kwargs(self, grid_override=None, mode_override=None) -> dict:
        n = self.numerics
        mode = mode_override or ("penalized" if n["penalization"] else "active-set")
        return {
            "n_cells": int(grid_override or n["grid_n"]),
            "eps_p": float(n["eps_p"]),
            "mode": mode,
            "tol_obstacle": float(n["tol_obstacle"]),
            "tol_complementarity": float(n["tol_complementarity"]),
            "tol_ode": float(n["tol_ode"]),
            "penalty_tol": float(n["penalty_tol"]),
        }
