"""Command-line entry point: ``weakdamp <subcommand> [options]``."""

from __future__ import annotations

import argparse
import configparser
import csv
import sys
from pathlib import Path

import numpy as np

from .bath import QuadratureError
from .oracle import RevivalError, SectorError
from .propagation import NumericalError
from .scenarios import (ConfigError, builtin_scenarios, exact, fit_rates, get_scenario,
                        oracle_responses, run_comparison, slope_table, solve, write_schema)
from .sysid import BranchError, identify_responses, effective_dimension
from .system import build_rate_table
from .trajectories import TrajectoryConfig, run_ensemble

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

RUN_DEFAULTS = {
    "kind": "lindblad",
    "n_traj": "1000",
    "traj_dt": "0.01",
    "tau": "0.5",
    "depth": "8",
    "criterion": "mass",
}


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI file with [scenario] name and parameters, optional [run]")
    common.add_argument("--scenario", help="scenario name (overrides the config file)")
    common.add_argument("--out", type=Path, help="output directory for CSV files")
    common.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                        help="set a scenario parameter; use run.KEY for run options (repeatable)")
    common.add_argument("--seed", type=int, default=0, help="root seed for trajectory runs (u64)")

    p = argparse.ArgumentParser(prog="weakdamp", description="weak-coupling master equations and reference dynamics")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("list", parents=[common], help="list built-in scenarios and their parameters")
    sub.add_parser("rates", parents=[common], help="print the per-transition rate table")
    sub.add_parser("evolve", parents=[common], help="evolve with one generator (run.kind)")
    sub.add_parser("compare", parents=[common], help="run all solvers and the exact oracle")
    sub.add_parser("sysid", parents=[common], help="identify the effective dimension of the exact dynamics")
    sub.add_parser("trajectories", parents=[common], help="Monte Carlo jump unravelling (run.n_traj, run.traj_dt)")
    sub.add_parser("fit", parents=[common], help="fit R_j and I_j of a generator to the exact dynamics")
    return p


def _split_override(item: str) -> tuple[str, str]:
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not KEY=VALUE")
    key, val = item.split("=", 1)
    return key.strip(), val.strip()


def _load(args) -> tuple[str | None, dict, dict]:
    name, params, run = None, {}, dict(RUN_DEFAULTS)
    if args.config is not None:
        cfg = configparser.ConfigParser()
        if not cfg.read(args.config):
            raise ConfigError(f"cannot read config file {args.config}")
        if "scenario" not in cfg:
            raise ConfigError("config file needs a [scenario] section")
        sec = dict(cfg["scenario"])
        name = sec.pop("name", None)
        params.update(sec)
        if "run" in cfg:
            run.update(cfg["run"])
    if args.scenario:
        name = args.scenario
    for item in args.override:
        key, val = _split_override(item)
        if key.startswith("run."):
            run[key[4:]] = val
        else:
            params[key] = val
    return name, params, run


def _require(name):
    if not name:
        raise ConfigError("no scenario given (use --scenario or a config file)")
    return get_scenario(name)


def _out(args) -> Path | None:
    if args.out is None:
        return None
    args.out.mkdir(parents=True, exist_ok=True)
    return args.out


def _cmd_list(args, name, params, run):
    for sc in builtin_scenarios().values():
        print(f"{sc.name:20s} {sc.description}")
        for key, val in sc.defaults.items():
            print(f"    {key} = {val}")


def _cmd_rates(args, name, params, run):
    sc = _require(name)
    setup = sc.setup(params)
    table = build_rate_table(setup.system, setup.bath)
    rows = table.rows()
    out = _out(args)
    fh = open(out / "rates.csv", "w", newline="") if out else sys.stdout
    try:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]) if rows else ["frequency"])
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) for k, v in r.items()})
    finally:
        if out:
            fh.close()


def _cmd_evolve(args, name, params, run):
    sc = _require(name)
    setup = sc.setup(params)
    kind = run["kind"]
    res = exact(setup) if kind == "exact" else solve(setup, kind)
    out = _out(args)
    if out:
        res.to_csv(out / f"{kind}.csv", {"scenario": sc.name, "solver": kind})
        write_schema(out)
    print(f"{sc.name}: {kind} final populations " + " ".join(f"{p:.6f}" for p in np.diag(res.states[-1]).real))


def _cmd_compare(args, name, params, run):
    sc = _require(name)
    report = run_comparison(sc, params, _out(args))
    for (a, b), e in report.errors.items():
        print(f"{a:>14s} vs {b:<14s} mean {e.mean:.3e}  max {e.max:.3e}  max element {e.max_element:.3e}")
    for k, v in report.positivity.items():
        print(f"{k:>14s} min eigenvalue {v:.3e}")


def _cmd_sysid(args, name, params, run):
    sc = _require(name)
    out = _out(args)
    if sc.name == "slope-table":
        p = sc.params(params)
        table = slope_table(p["max_log2_ratio"], tau=p["tau"], depth=p["depth"],
                            lower_offset=p["lower_offset"], upper_offset=p["upper_offset"], cutoff=p["cutoff"])
        header = ["r"] + [f"2^{e}" for e in table["log2_ratio"]]
        lines = [header, ["D_2"] + table["two_level"], ["D_V"] + table["v_system"]]
        for line in lines:
            print(" ".join(f"{x!s:>5}" for x in line))
        if out:
            with open(out / "slope_table.csv", "w", newline="") as fh:
                csv.writer(fh).writerows(lines)
        return
    setup = sc.setup(params)
    tau, depth = float(run["tau"]), int(run["depth"])
    resp = oracle_responses(setup.system, setup.bath, setup.support, tau, 2 * depth + 2, setup.n_modes)
    model = identify_responses(resp, depth)
    dim = effective_dimension(model, run["criterion"])
    print(f"{sc.name}: effective dimension {dim}")
    print("singular values: " + " ".join(f"{s:.3e}" for s in model.singular_values[:12]))
    if out:
        resp.save(out / "responses.csv")
        model.save(out / "model.csv")


def _cmd_trajectories(args, name, params, run):
    sc = _require(name)
    setup = sc.setup(params)
    if setup.adiabatic:
        raise ConfigError("trajectories need a time-independent scenario")
    cfg = TrajectoryConfig(int(run["n_traj"]), float(run["traj_dt"]), args.seed)
    rates = build_rate_table(setup.system, setup.bath)
    res = run_ensemble(setup.system, rates, setup.psi0, setup.times, cfg)
    out = _out(args)
    if out:
        res.to_csv(out / "trajectories.csv", {"scenario": sc.name, "seed": cfg.seed,
                                               "n_traj": cfg.n_traj, "dt": cfg.dt})
        write_schema(out)
    print(f"{sc.name}: {cfg.n_traj} trajectories, final populations "
          + " ".join(f"{p:.4f}" for p in np.diag(res.states[-1]).real))


def _cmd_fit(args, name, params, run):
    sc = _require(name)
    setup = sc.setup(params)
    ref = exact(setup)
    result = fit_rates(setup, ref, run["kind"])
    print(f"{sc.name}: nominal error {result.nominal_error:.4e}, fitted error {result.error:.4e} "
          f"after {result.sweeps} sweeps")
    for row in result.rates.rows():
        print(f"  w={row['frequency']:.6f} R={row['R']:.6e} I={row['I']:.6e}")
    out = _out(args)
    if out:
        with open(out / "fit.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["frequency", "R", "I", "nominal_error", "fitted_error"])
            for row in result.rates.rows():
                w.writerow([repr(row["frequency"]), repr(row["R"]), repr(row["I"]),
                            repr(result.nominal_error), repr(result.error)])


COMMANDS = {
    "list": _cmd_list, "rates": _cmd_rates, "evolve": _cmd_evolve, "compare": _cmd_compare,
    "sysid": _cmd_sysid, "trajectories": _cmd_trajectories, "fit": _cmd_fit,
}


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        name, params, run = _load(args)
        COMMANDS[args.command](args, name, params, run)
    except (ConfigError, SectorError, RevivalError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, QuadratureError, BranchError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
