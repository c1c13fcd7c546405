"""Command-line front end.

Subcommands: solve, sweep, budget-curve, verify, kernel-quantile.  Outputs
are CSV files plus JSON metadata, written with shortest round-trip float
formatting and LF line endings so identical inputs give byte-identical
artifacts.  Exit codes: 0 ok, 2 config error, 3 solver non-convergence,
4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import budget as budget_mod
from . import oracle, payoff, solver
from .config import ConfigError, SolveConfig
from .distributions import probability_grid
from .objective import GridQuantile

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_VERIFY = 4


def _fmt(value) -> str:
    return repr(float(value))


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if not isinstance(v, (int, np.integer)) else str(int(v))
                              for v in row) + "\n")


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _tag(value) -> str:
    if isinstance(value, (list, tuple)):
        return ":".join(_fmt(v) for v in value)
    return _fmt(value)


def _suffix(name, value) -> str:
    return f"_{name}={_tag(value)}" if name else ""


# -- single solve ------------------------------------------------------------


def _execute(cfg: SolveConfig, out_dir: str, grid=None, mode=None, name="", value=None):
    """Run one solve (recovering the multiplier from the budget if needed)
    and write solution/profile/meta files.  Returns the index entry."""
    objective = cfg.objective()
    kernel = cfg.kernel()
    kwargs = cfg.solve_kwargs(grid_override=grid, mode_override=mode)

    if cfg.multiplier is not None:
        lam = cfg.multiplier
    else:
        lam = budget_mod.lambda_of_x(objective, kernel, cfg.budget_x, **kwargs)

    suffix = _suffix(name, value)
    files = {
        "solution": f"solution{suffix}.csv",
        "profile": f"profile{suffix}.csv",
        "meta": f"meta{suffix}.json",
    }

    converged = True
    try:
        result = solver.solve(objective, kernel, lam, **kwargs)
    except solver.SolverConvergenceError as exc:
        result = exc.result
        converged = False

    _write_csv(os.path.join(out_dir, files["solution"]), solver.SOLUTION_COLUMNS,
               result.table())
    prof = payoff.profile(result, kernel)
    _write_csv(os.path.join(out_dir, files["profile"]), payoff.PROFILE_COLUMNS,
               zip(prof.rho, prof.payoff))
    meta = {
        "config": cfg.as_dict(),
        "lambda": lam,
        "pbar": result.pbar,
        "budget": result.budget,
        "mode": result.mode,
        "grid_cells": int(kwargs["n_cells"]),
        "converged": converged,
        "degenerate": result.degenerate,
        "residuals": result.residual_report.as_dict(),
    }
    _write_json(os.path.join(out_dir, files["meta"]), meta)
    return {"files": files, "converged": converged, "lambda": lam,
            "budget": result.budget}


def _cmd_solve(args) -> int:
    cfg = SolveConfig.from_yaml(args.config)
    out_dir = args.out or cfg.output["directory"]
    os.makedirs(out_dir, exist_ok=True)
    entry = _execute(cfg, out_dir, grid=args.grid, mode=args.mode)
    if not entry["converged"]:
        print("solver did not converge; residual report written", file=sys.stderr)
        return EXIT_SOLVER
    print(f"solved: lambda={_fmt(entry['lambda'])} budget={_fmt(entry['budget'])}")
    return EXIT_OK


# -- sweeps -------------------------------------------------------------------

_PAIR_PARAMS = {"gamma", "c"}
_TUPLE_PARAMS = {"claim"}
_SCALAR_PARAMS = {"theta", "x", "alpha", "y", "lambda"}


def _parse_sweep(spec: str):
    if "=" not in spec:
        raise ConfigError("--sweep expects NAME=v1,v2,...")
    name, _, values = spec.partition("=")
    name = name.strip()
    if name not in _PAIR_PARAMS | _TUPLE_PARAMS | _SCALAR_PARAMS:
        raise ConfigError(f"unknown sweep parameter {name!r}")
    parsed = []
    for chunk in values.split(","):
        chunk = chunk.strip()
        if not chunk:
            raise ConfigError("empty sweep value")
        try:
            if name in _SCALAR_PARAMS:
                parsed.append(float(chunk))
            else:
                parsed.append(tuple(float(v) for v in chunk.split(":")))
        except ValueError as exc:
            raise ConfigError(f"cannot parse sweep value {chunk!r}") from exc
    if not parsed:
        raise ConfigError("sweep needs at least one value")
    return name, parsed


def _apply_sweep_value(base: dict, name: str, value) -> dict:
    cfg = json.loads(json.dumps(base))  # deep copy of plain data
    if name == "theta":
        cfg["market"]["theta"] = value
    elif name == "alpha":
        cfg["alpha"] = value
    elif name == "x":
        cfg.pop("multiplier", None)
        cfg["budget"] = {"x": value}
    elif name == "lambda":
        cfg.pop("budget", None)
        cfg["multiplier"] = {"lambda": value}
    elif name == "y":
        if cfg["claim"].get("kind") != "uniform":
            raise ConfigError("sweeping y needs a uniform claim")
        cfg["claim"]["y"] = value
    elif name in ("gamma", "c"):
        if len(value) != len(cfg["utility"][name]):
            raise ConfigError(f"sweep {name} values need length "
                              f"{len(cfg['utility'][name])}")
        cfg["utility"][name] = list(value)
    elif name == "claim":
        if len(value) != 4:
            raise ConfigError("sweep claim values are mu:sigma:a:b")
        mu, sigma, a, b = value
        cfg["claim"] = {"kind": "truncated_normal", "mu": mu, "sigma": sigma,
                        "a": a, "b": b}
    return cfg


def _cmd_sweep(args) -> int:
    base_cfg = SolveConfig.from_yaml(args.config)
    name, values = _parse_sweep(args.sweep)
    out_dir = args.out or base_cfg.output["directory"]
    os.makedirs(out_dir, exist_ok=True)
    base = base_cfg.as_dict()

    def run_one(value):
        try:
            cfg = SolveConfig.from_dict(_apply_sweep_value(base, name, value))
            entry = _execute(cfg, out_dir, grid=args.grid, mode=args.mode,
                             name=name, value=value)
            if name == "theta":
                entry["files"]["kernel"] = _write_kernel_csv(
                    cfg, out_dir, name, value)
            return {"value": _tag(value), "ok": entry["converged"],
                    "error": None if entry["converged"] else "non-convergence",
                    "lambda": entry["lambda"], "budget": entry["budget"],
                    "files": entry["files"]}
        except (ConfigError, ValueError, solver.SolverConvergenceError,
                budget_mod.UnattainableBudgetError) as exc:
            return {"value": _tag(value), "ok": False, "error": str(exc),
                    "files": {}}

    workers = min(len(values), os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        runs = list(pool.map(run_one, values))

    index = {"command": "sweep", "parameter": name,
             "values": [_tag(v) for v in values], "config": base, "runs": runs}
    _write_json(os.path.join(out_dir, "index.json"), index)
    failures = [r for r in runs if not r["ok"]]
    for r in failures:
        print(f"sweep value {r['value']} failed: {r['error']}", file=sys.stderr)
    print(f"sweep over {name}: {len(runs) - len(failures)}/{len(runs)} ok; "
          f"index at {os.path.join(out_dir, 'index.json')}")
    return EXIT_OK if not failures else EXIT_SOLVER


def _write_kernel_csv(cfg: SolveConfig, out_dir, name="", value=None) -> str:
    kernel = cfg.kernel()
    p = probability_grid(1000, 1e-4)
    fname = f"kernel{_suffix(name, value)}.csv"
    _write_csv(os.path.join(out_dir, fname), ("p", "q_rho"),
               zip(p, kernel.quantile(p)))
    return fname


def _cmd_kernel_quantile(args) -> int:
    cfg = SolveConfig.from_yaml(args.config)
    out_dir = args.out or cfg.output["directory"]
    os.makedirs(out_dir, exist_ok=True)
    base = cfg.as_dict()
    runs = []
    if args.sweep:
        name, values = _parse_sweep(args.sweep)
        if name != "theta":
            raise ConfigError("kernel-quantile sweeps only over theta")
        for value in values:
            sub = SolveConfig.from_dict(_apply_sweep_value(base, name, value))
            fname = _write_kernel_csv(sub, out_dir, name, value)
            runs.append({"value": _tag(value), "ok": True, "files": {"kernel": fname}})
        values_tags = [_tag(v) for v in values]
    else:
        fname = _write_kernel_csv(cfg, out_dir)
        runs.append({"value": _tag(cfg.market["theta"]), "ok": True,
                     "files": {"kernel": fname}})
        values_tags = [_tag(cfg.market["theta"])]
    index = {"command": "kernel-quantile", "parameter": "theta",
             "values": values_tags, "config": base, "runs": runs}
    _write_json(os.path.join(out_dir, "index.json"), index)
    print(f"kernel quantile data written to {out_dir}")
    return EXIT_OK


def _cmd_budget_curve(args) -> int:
    cfg = SolveConfig.from_yaml(args.config)
    name, values = _parse_sweep(args.sweep)
    if name not in ("lambda", "x"):
        raise ConfigError("budget-curve sweeps over lambda or x")
    out_dir = args.out or cfg.output["directory"]
    os.makedirs(out_dir, exist_ok=True)
    objective = cfg.objective()
    kernel = cfg.kernel()
    kwargs = cfg.solve_kwargs(grid_override=args.grid, mode_override=args.mode)

    def run_one(value):
        try:
            if name == "lambda":
                lam = value
                x = budget_mod.x_of_lambda(objective, kernel, lam, **kwargs)
            else:
                lam = budget_mod.lambda_of_x(objective, kernel, value, **kwargs)
                x = budget_mod.x_of_lambda(objective, kernel, lam, **kwargs)
            return {"lambda": lam, "x": x, "ok": True, "error": None}
        except (ValueError, solver.SolverConvergenceError,
                budget_mod.UnattainableBudgetError) as exc:
            return {"lambda": value if name == "lambda" else None,
                    "x": value if name == "x" else None,
                    "ok": False, "error": str(exc)}

    workers = min(len(values), os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(run_one, values))

    good = sorted((r for r in rows if r["ok"]), key=lambda r: r["lambda"])
    _write_csv(os.path.join(out_dir, "curve.csv"), ("lambda", "x"),
               [(r["lambda"], r["x"]) for r in good])
    index = {"command": "budget-curve", "parameter": name,
             "values": [_tag(v) for v in values], "config": cfg.as_dict(),
             "files": {"curve": "curve.csv"}, "runs": rows}
    _write_json(os.path.join(out_dir, "index.json"), index)
    for r in rows:
        if not r["ok"]:
            print(f"budget-curve value failed: {r['error']}", file=sys.stderr)
    print(f"budget curve with {len(good)} rows written to {out_dir}")
    return EXIT_OK


# -- verification -------------------------------------------------------------


def run_verify(seed: int, sizes, tolerance: float = 1e-10) -> dict:
    """Seeded oracle cross-checks; the report lists each check's outcome."""
    from .distributions import DiscreteDistribution, LognormalKernel
    from .objective import RobustObjective
    from .utility import UtilitySpec

    rng = np.random.default_rng(seed)
    checks = []

    def record(name, passed, detail):
        checks.append({"name": name, "passed": bool(passed), "detail": detail})

    canonical = oracle.CouplingProblem([1.0, 2.0], [0.0, 1.0])
    lo, hi = oracle.rearrangement_extremes(canonical)
    record("rearrangement-canonical", (lo, hi) == (0.5, 1.0),
           {"min": lo, "max": hi, "expected": [0.5, 1.0]})

    for n in sizes:
        xs = rng.uniform(-2.0, 3.0, size=n).tolist()
        ys = rng.uniform(-1.0, 2.0, size=n).tolist()
        prob = oracle.CouplingProblem(xs, ys)
        lo, hi = oracle.rearrangement_extremes(prob)
        exact = (lo == oracle.anticomonotone_pairing_value(prob)
                 and hi == oracle.comonotone_pairing_value(prob))
        record(f"rearrangement-n{n}", exact, {"min": lo, "max": hi})

    for n in sizes:
        util = UtilitySpec(rng.uniform(0.5, 2.0, 2), rng.uniform(0.2, 1.5, 2))
        claim = DiscreteDistribution.uniform_atoms(rng.uniform(0.0, 2.0, n))
        objective = RobustObjective(float(rng.uniform(0, 1)), claim, util)
        wealth = np.sort(rng.uniform(0.0, 3.0, n))
        worst, best, blended = oracle.coupling_value(objective, wealth)
        quad = objective.J_alpha(oracle.step_quantile(wealth))
        record(f"coupling-n{n}", abs(blended - quad) <= tolerance,
               {"enumerated": blended, "quadrature": quad,
                "difference": abs(blended - quad)})

    y = rng.normal(size=100)
    proj = oracle.pava_project(y)
    again = oracle.pava_project(proj)
    record("pava-idempotent", float(np.max(np.abs(proj - again))) <= max(tolerance, 1e-15),
           {"drift": float(np.max(np.abs(proj - again)))})
    record("pava-mean", abs(proj.mean() - y.mean()) <= max(tolerance, 1e-12),
           {"difference": abs(float(proj.mean() - y.mean()))})
    qp_gap = _pava_vs_partition_enumeration(rng.normal(size=6))
    record("pava-qp-enumeration", qp_gap <= max(tolerance, 1e-12), {"gap": qp_gap})

    kernel = LognormalKernel(r=0.02, theta=float(rng.uniform(0.2, 0.4)), T=1.0)
    from .distributions import UniformClaim
    util = UtilitySpec(rng.uniform(0.5, 2.0, 2), np.sort(rng.uniform(0.2, 1.2, 2)))
    objective = RobustObjective(float(rng.uniform(0, 1)), UniformClaim(2.0), util)
    p_star = float(rng.uniform(0.05, 0.4))
    lam = objective.utility.marginal_utility_bound(0.0) / kernel.quantile(1.0 - p_star)
    vi = solver.solve(objective, kernel, lam, n_cells=2000)
    direct_q, _ = oracle.direct_solve(
        oracle.DirectProblem(objective, kernel, vi.budget, m=150))
    grid = vi.p
    direct_on = np.maximum.accumulate(np.interp(grid, direct_q.p, direct_q.values))
    j_vi = objective.J_alpha(vi.quantile())
    j_direct = objective.J_alpha(GridQuantile(grid, direct_on))
    mask = (grid > vi.pbar + 0.02) & (grid < 0.98)
    sup = float(np.max(np.abs(vi.q[mask] - direct_on[mask])))
    rel = abs(j_vi - j_direct) / abs(j_vi)
    record("direct-vs-solver", sup <= 1e-2 and rel <= 1e-3,
           {"sup_norm": sup, "objective_rel": rel})

    return {"seed": int(seed), "sizes": [int(n) for n in sizes],
            "tolerance": tolerance, "ok": all(c["passed"] for c in checks),
            "checks": checks}


def _pava_vs_partition_enumeration(y: np.ndarray) -> float:
    """Best monotone fit by enumerating all block partitions of a short array."""
    n = y.size
    best = None
    for mask in range(1 << (n - 1)):
        cuts = [0] + [i + 1 for i in range(n - 1) if mask >> i & 1] + [n]
        means = [float(np.mean(y[a:b])) for a, b in zip(cuts, cuts[1:])]
        if any(m2 < m1 for m1, m2 in zip(means, means[1:])):
            continue
        fit = np.concatenate([np.full(b - a, m) for (a, b), m in
                              zip(zip(cuts, cuts[1:]), means)])
        dist = float(np.sum((fit - y) ** 2))
        if best is None or dist < best[0]:
            best = (dist, fit)
    return float(np.max(np.abs(oracle.pava_project(y) - best[1])))


def _cmd_verify(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",")] if args.sizes else [2, 5, 6]
    for n in sizes:
        if not 2 <= n <= oracle.MAX_ATOMS:
            raise ConfigError(f"verify sizes must lie in [2, {oracle.MAX_ATOMS}]")
    report = run_verify(args.seed, sizes, tolerance=args.tol)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write_json(os.path.join(args.out, "verify.json"), report)
    if not report["ok"]:
        first = next(c for c in report["checks"] if not c["passed"])
        print(f"verification failed: {first['name']}: "
              f"{json.dumps(first['detail'], sort_keys=True)}", file=sys.stderr)
        return EXIT_VERIFY
    print(f"all {len(report['checks'])} verification checks passed")
    return EXIT_OK


# -- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="claimquant",
        description="Optimal wealth quantiles under claim-dependence ambiguity")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, config_required=True):
        if config_required:
            sp.add_argument("--config", required=True, help="YAML config path")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--grid", type=int, default=None,
                        help="override numerics.grid_n")
        sp.add_argument("--mode", choices=("active-set", "penalized"),
                        default=None, help="override solver mode")

    sp = sub.add_parser("solve", help="solve one configuration")
    common(sp)
    sp.set_defaults(func=_cmd_solve)

    sp = sub.add_parser("sweep", help="independent solves over a parameter list")
    common(sp)
    sp.add_argument("--sweep", required=True, metavar="NAME=v1,v2,...",
                    help="parameter to sweep (theta, x, alpha, y, lambda, "
                         "gamma, c, claim)")
    sp.set_defaults(func=_cmd_sweep)

    sp = sub.add_parser("budget-curve", help="sample the endowment/multiplier curve")
    common(sp)
    sp.add_argument("--sweep", required=True, metavar="NAME=v1,v2,...",
                    help="lambda=... or x=...")
    sp.set_defaults(func=_cmd_budget_curve)

    sp = sub.add_parser("kernel-quantile", help="pricing-kernel quantile data")
    common(sp)
    sp.add_argument("--sweep", default=None, metavar="theta=v1,v2,...")
    sp.set_defaults(func=_cmd_kernel_quantile)

    sp = sub.add_parser("verify", help="run the brute-force oracle checks")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--sizes", default=None, help="comma list of atom counts")
    sp.add_argument("--tol", type=float, default=1e-10,
                    help="comparison tolerance for the oracle checks")
    sp.add_argument("--out", default=None, help="write verify.json here")
    sp.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except budget_mod.UnattainableBudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except solver.SolverConvergenceError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
