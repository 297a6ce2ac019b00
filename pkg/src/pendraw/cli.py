"""Command-line front end.

Subcommands: ``mortality`` (hazard path dump), ``coeffs`` (affine coefficient
curves), ``policy`` (one policy decision), ``simulate`` (base scenario),
``compare`` (hedged vs unhedged), ``sweep`` (sensitivity in theta1 or phi).

Exit codes: 0 success, 1 configuration or I/O error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import (ExperimentConfig, build_model, default_config_path,
                     load_config, with_overrides)
from .control import annuity_G, optimal_policy
from .experiments import run_experiment, write_csv
from .mortality import ConfigError, paths_to_rows, simulate_paths
from .numerics import NumericalFailure, TimeGrid
from .pricing import coeffs_single, coeffs_two_pop


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None,
                   help="experiment config file (default: shipped table1.cfg)")
    p.add_argument("--out", type=str, default=None, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="random seed override")
    p.add_argument("--paths", type=int, default=None, help="path count override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pendraw",
        description="Stochastic-mortality pension drawdown with a rolling "
                    "longevity bond")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mortality", help="simulate hazard paths and dump CSV")
    _add_common(p)

    p = sub.add_parser("coeffs", help="affine coefficient curves as CSV")
    _add_common(p)
    p.add_argument("--t", type=float, default=0.0, help="anchor time (years)")
    p.add_argument("--s-max", type=float, default=None,
                   help="last maturity (default: horizon)")
    p.add_argument("--s-step", type=float, default=1.0)

    p = sub.add_parser("policy", help="print one policy decision as CSV")
    _add_common(p)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--lambda1", type=float, default=None,
                   help="hazard of population 1 (default: model initial value)")
    p.add_argument("--lambda2", type=float, default=None)
    p.add_argument("--wealth", type=float, default=None,
                   help="current wealth (default: scenario y0)")

    for name, help_ in (("simulate", "base scenario CSVs"),
                        ("compare", "hedged vs unhedged improvement CSVs"),
                        ("sweep", "sensitivity sweep CSVs")):
        p = sub.add_parser(name, help=help_)
        _add_common(p)
        if name == "sweep":
            p.add_argument("--var", choices=("theta1", "phi"), default=None)
            p.add_argument("--values", type=str, default=None,
                           help="comma-separated sweep values")
    return parser


def _load(args) -> ExperimentConfig:
    path = args.config if args.config is not None else default_config_path()
    cfg = load_config(path)
    return with_overrides(cfg, out_dir=args.out, seed=args.seed,
                          n_paths=args.paths)


def _cmd_mortality(args) -> int:
    cfg = _load(args)
    model = build_model(cfg)
    sc = cfg.scenario
    grid = TimeGrid(0.0, sc.horizon, sc.dt)
    paths = simulate_paths(model, grid, sc.n_paths, sc.seed, keep_shocks=False)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = write_csv(paths_to_rows(paths),
                     ["time", "path_id", "lambda1", "lambda2", "survival"],
                     out / "paths.csv")
    print(f"wrote {path}")
    return 0


def _cmd_coeffs(args) -> int:
    cfg = _load(args)
    model = build_model(cfg)
    s_max = args.s_max if args.s_max is not None else cfg.scenario.horizon
    if s_max < args.t:
        raise ConfigError(f"--s-max ({s_max}) must be >= --t ({args.t})")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def rows():
        s = args.t
        while s <= s_max + 1e-9:
            if cfg.is_two_pop:
                c = coeffs_two_pop(model, args.t, min(s, s_max))
                yield (args.t, s, c.c0, c.c1, c.c2)
            else:
                c = coeffs_single(model, args.t, min(s, s_max))
                yield (args.t, s, c.a0, c.a1, "")
            s += args.s_step

    path = write_csv(rows(), ["t", "s", "A0_or_C0", "A1_or_C1", "C2"],
                     out / "coeffs.csv")
    print(f"wrote {path}")
    return 0


def _cmd_policy(args) -> int:
    from .mortality import initial_hazard

    cfg = _load(args)
    model = build_model(cfg)
    if cfg.is_two_pop:
        lam = [args.lambda1 if args.lambda1 is not None
               else initial_hazard(model.gm1),
               args.lambda2 if args.lambda2 is not None
               else initial_hazard(model.gm2)]
    else:
        lam = [args.lambda1 if args.lambda1 is not None
               else initial_hazard(model.gm)]
    wealth = args.wealth if args.wealth is not None else cfg.scenario.y0
    decision = optimal_policy(model, cfg.scenario, cfg.market, args.t,
                              np.array(lam), wealth)
    g = annuity_G(model, cfg.scenario, cfg.market, args.t, np.array(lam))
    from .experiments import format_number as f
    print("t,lambda1,lambda2,wealth,G,withdraw_rate,stock_weight,bond_weight,"
          "cash_weight")
    lam2 = f(lam[1]) if len(lam) > 1 else ""
    print(",".join([f(args.t), f(lam[0]), lam2, f(wealth), f(g),
                    f(decision.withdraw_rate), f(decision.stock_weight),
                    f(decision.bond_weight), f(decision.cash_weight)]))
    return 0


def _cmd_experiment(args, kind: str) -> int:
    cfg = _load(args)
    sweep_var = getattr(args, "var", None)
    sweep_values = None
    if getattr(args, "values", None) is not None:
        try:
            sweep_values = tuple(float(x) for x in args.values.split(",")
                                 if x.strip())
        except ValueError as exc:
            raise ConfigError(f"invalid --values: {exc}") from exc
    cfg = with_overrides(cfg, experiment=kind, sweep_var=sweep_var,
                         sweep_values=sweep_values)
    if kind == "sweep" and (cfg.sweep_var is None or not cfg.sweep_values):
        raise ConfigError("sweep needs --var and --values (or config entries)")
    result = run_experiment(cfg)
    print(result.summary)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "mortality":
            return _cmd_mortality(args)
        if args.command == "coeffs":
            return _cmd_coeffs(args)
        if args.command == "policy":
            return _cmd_policy(args)
        return _cmd_experiment(args, {"simulate": "base"}.get(args.command,
                                                              args.command))
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
