"""Command-line front end.

Subcommands: ``test`` and ``ci`` on a CSV dataset, and ``simulate-size``,
``simulate-power``, ``simulate-coverage`` for Monte Carlo campaigns.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 infeasible
solver program, 5 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .inference import InferenceConfig, PipelineError, confidence_interval, default_grid, prepare
from .model import DataError, Dataset
from .montecarlo import (DesignSpec, run_coverage_experiment, run_power_experiment,
                         run_size_experiment)
from .reporting import outcome_text, summary_table, write_report

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INFEASIBLE, EXIT_NUMERICAL = 0, 2, 3, 4, 5
_KIND_EXIT = {"data": EXIT_DATA, "infeasible": EXIT_INFEASIBLE, "numerical": EXIT_NUMERICAL}

log = logging.getLogger("mdslogit")


class ConfigError(ValueError):
    pass


def ingest_csv(path, response_col: str = "y", standardize: bool = False) -> Dataset:
    """Read a header + numeric rows CSV. The response column must be 0/1."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if response_col not in header:
            raise DataError(f"{path}: no response column {response_col!r} in header")
        yi = header.index(response_col)
        names = [h for i, h in enumerate(header) if i != yi]
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}: line {line_no} has {len(row)} fields, expected {len(header)}")
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise DataError(f"{path}: line {line_no} has a non-numeric field") from None
            if vals[yi] not in (0.0, 1.0):
                raise DataError(f"{path}: line {line_no} has response {row[yi].strip()!r}; expected 0 or 1")
            rows.append(vals)
    if not rows:
        raise DataError(f"{path}: no data rows")
    arr = np.array(rows)
    y = arr[:, yi]
    x = np.delete(arr, yi, axis=1)
    if standardize:
        sd = x.std(axis=0, ddof=1)
        const = np.flatnonzero(~(sd > 0))
        if const.size:
            raise DataError(f"cannot standardize constant column {names[const[0]]!r}")
        x = (x - x.mean(axis=0)) / sd
    return Dataset(x, y)


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _sparsities(text: str, n: int, p: int) -> list[int]:
    out = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        if not tok:
            continue
        out.append(n if tok == "n" else p if tok == "p" else int(tok))
    for s in out:
        if not 1 <= s <= p:
            raise ConfigError(f"sparsity {s} outside [1, {p}]")
    return out


def _add_common(sp: argparse.ArgumentParser):
    sp.add_argument("--config", help="key=value file of option defaults (flags override it)")
    sp.add_argument("--tested-index", type=int, default=0)
    sp.add_argument("--eta-scale", type=float, default=0.5, help="eta = scale * sqrt(log p / n)")
    sp.add_argument("--rho0", type=float, default=0.01)
    sp.add_argument("--lambda-scale", type=float, default=1.0, help="lambda = scale * sqrt(log p / n)")
    sp.add_argument("--split-fraction", type=float, default=0.5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", help="output path (simulations write <out>.csv and <out>.json)")
    sp.add_argument("--format", choices=("csv", "json"), default="json")
    sp.add_argument("-v", "--verbose", action="store_true")


def _add_data(sp):
    sp.add_argument("--data", required=False, help="CSV file with a header row")
    sp.add_argument("--response-col", default="y")
    sp.add_argument("--standardize", action="store_true")


def _add_sim(sp, power=False):
    sp.add_argument("--n", type=int, default=200)
    sp.add_argument("--p", type=int, default=500)
    sp.add_argument("--design", default="toeplitz" if power else "toeplitz,identity,equicorrelation",
                    help="comma list: identity, toeplitz[:rho], equicorrelation[:rho]")
    sp.add_argument("--reps", type=int, default=100)
    sp.add_argument("--threads", type=int, default=1, help="worker processes (0 = all cores)")
    if power:
        sp.add_argument("--sparsity", default="3")
        sp.add_argument("--h-grid", default="0,0.25,0.5,0.75,1,1.5,2")
    else:
        sp.add_argument("--sparsity", default="10,20,50,100,n,p")


def _add_grid(sp):
    sp.add_argument("--grid-lo", type=float)
    sp.add_argument("--grid-hi", type=float)
    sp.add_argument("--grid-steps", type=int, default=81)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mdslogit", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    t = sub.add_parser("test", help="test H0: beta[tested] = beta0 on a CSV dataset")
    _add_common(t)
    _add_data(t)
    t.add_argument("--beta0", type=float, default=0.0)
    t.add_argument("--alpha", type=float, default=0.05)
    c = sub.add_parser("ci", help="confidence interval by test inversion on a CSV dataset")
    _add_common(c)
    _add_data(c)
    c.add_argument("--level", type=float, default=0.95)
    _add_grid(c)
    s = sub.add_parser("simulate-size", help="null rejection rates")
    _add_common(s)
    _add_sim(s)
    s.add_argument("--alpha", type=float, default=0.05)
    pw = sub.add_parser("simulate-power", help="power curve over h")
    _add_common(pw)
    _add_sim(pw, power=True)
    pw.add_argument("--alpha", type=float, default=0.05)
    cv = sub.add_parser("simulate-coverage", help="confidence interval coverage")
    _add_common(cv)
    _add_sim(cv)
    cv.add_argument("--level", type=float, default=0.95)
    _add_grid(cv)
    return ap


def read_config_file(path) -> dict:
    out = {}
    for i, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}: line {i} is not key=value")
        out[key.strip().lstrip("-").replace("-", "_")] = val.strip()
    return out


def parse_args(argv=None) -> argparse.Namespace:
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "config", None):
        file_cfg = read_config_file(args.config)
        sp = ap._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sp._actions}
        defaults = {}
        for k, v in file_cfg.items():
            if k not in known or k in ("config", "help"):
                raise ConfigError(f"unknown config key {k!r} for {args.command}")
            act = known[k]
            if act.const is True:  # store_true flag
                defaults[k] = v.lower() in ("1", "true", "yes", "on")
            else:
                defaults[k] = act.type(v) if act.type else v
        sp.set_defaults(**defaults)
        args = ap.parse_args(argv)
        args.config_values = file_cfg
    return args


def _inference_config(args) -> InferenceConfig:
    if not 0 < args.split_fraction < 1:
        raise ConfigError("--split-fraction must lie in (0, 1)")
    if not 0 < args.rho0 < 1:
        raise ConfigError("--rho0 must lie in (0, 1)")
    if not (args.eta_scale > 0 and args.lambda_scale > 0):
        raise ConfigError("--eta-scale and --lambda-scale must be positive")
    return InferenceConfig(split_fraction=args.split_fraction, seed=args.seed,
                           lambda_scale=args.lambda_scale, eta_scale=args.eta_scale, rho0=args.rho0)


def _check_unit(name, value):
    if not 0 < value < 1:
        raise ConfigError(f"{name} must lie in (0, 1)")


def _emit(text: str, out):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load(args) -> Dataset:
    if not args.data:
        raise ConfigError("--data is required")
    if not Path(args.data).is_file():
        raise ConfigError(f"data file {args.data!r} not found")
    return ingest_csv(args.data, args.response_col, args.standardize)


def cmd_test(args) -> int:
    _check_unit("--alpha", args.alpha)
    cfg = _inference_config(args)
    ds = _load(args)
    prep = prepare(ds, args.tested_index, cfg)
    out = prep.at(args.beta0, args.alpha)
    record = out.as_dict() | {"lasso_converged": prep.lasso_converged, "split_seed": args.seed}
    _emit(outcome_text(record, args.format), args.out)
    return EXIT_OK


def _grid(args, center, n, p):
    if args.grid_lo is None and args.grid_hi is None:
        return default_grid(center, n, p, args.grid_steps)
    if args.grid_lo is None or args.grid_hi is None:
        raise ConfigError("--grid-lo and --grid-hi go together")
    return (args.grid_lo, args.grid_hi, args.grid_steps)


def cmd_ci(args) -> int:
    _check_unit("--level", args.level)
    if args.grid_steps < 3:
        raise ConfigError("--grid-steps must be at least 3")
    if args.grid_lo is not None and args.grid_hi is not None and not args.grid_lo < args.grid_hi:
        raise ConfigError("--grid-lo must be below --grid-hi")
    cfg = _inference_config(args)
    ds = _load(args)
    prep = prepare(ds, args.tested_index, cfg)
    grid = _grid(args, float(prep.beta_hat[args.tested_index]), prep.ld.n, ds.p)
    ci = confidence_interval(ds, args.tested_index, args.level, grid, cfg, prepared=prep)
    record = {"lower": ci.lower, "upper": ci.upper, "length": ci.length, "level": ci.level,
              "grid_lo": grid[0], "grid_hi": grid[1], "grid_steps": grid[2],
              "point_estimate": ci.point_estimate, "contains_point_estimate": ci.contains_point_estimate,
              "degenerate": ci.degenerate, "contiguous": ci.contiguous, "tested_index": args.tested_index}
    _emit(outcome_text(record, args.format), args.out)
    return EXIT_OK if not ci.degenerate else EXIT_NUMERICAL


def cmd_simulate(args) -> int:
    cfg = _inference_config(args)
    if args.reps < 1:
        raise ConfigError("--reps must be >= 1")
    if args.n < 4 or args.p < 2:
        raise ConfigError("--n must be >= 4 and --p >= 2")
    try:
        designs = [DesignSpec.parse(d, args.n, args.p) for d in args.design.split(",") if d.strip()]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if not designs:
        raise ConfigError("--design is empty")
    sparsities = _sparsities(args.sparsity, args.n, args.p)
    if not args.out:
        raise ConfigError("--out is required for simulations")
    if args.command == "simulate-size":
        _check_unit("--alpha", args.alpha)
        rep = run_size_experiment(designs, sparsities, args.reps, args.alpha, cfg, args.seed, args.threads)
    elif args.command == "simulate-power":
        _check_unit("--alpha", args.alpha)
        if len(designs) != 1 or len(sparsities) != 1:
            raise ConfigError("simulate-power takes one --design and one --sparsity")
        h_grid = _floats(args.h_grid)
        if not h_grid:
            raise ConfigError("--h-grid is empty")
        rep = run_power_experiment(designs[0], sparsities[0], h_grid, args.reps, args.alpha, cfg,
                                   args.seed, args.threads)
    else:
        _check_unit("--level", args.level)
        grid = None
        if args.grid_lo is not None or args.grid_hi is not None:
            grid = _grid(args, 0.0, args.n, args.p)
        rep = run_coverage_experiment(designs, sparsities, args.reps, args.level, grid, cfg,
                                      args.seed, args.threads)
    if getattr(args, "config_values", None):
        rep.config["config_file"] = args.config_values
    write_report(rep, args.out)
    print(summary_table(rep))
    bad = [c for c in rep.cells if c.failed]
    for c in bad:
        print(f"warning: cell design={c.design} s={c.s} h={c.h:g} had no completed replications",
              file=sys.stderr)
    return EXIT_NUMERICAL if len(bad) == len(rep.cells) else EXIT_OK


COMMANDS = {"test": cmd_test, "ci": cmd_ci, "simulate-size": cmd_simulate,
            "simulate-power": cmd_simulate, "simulate-coverage": cmd_simulate}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except PipelineError as exc:
        print(f"{exc.kind} failure in stage {exc.stage}: {exc}", file=sys.stderr)
        return _KIND_EXIT.get(exc.kind, EXIT_NUMERICAL)
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
