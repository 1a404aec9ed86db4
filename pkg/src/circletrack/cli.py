"""Command-line interface.

Exit codes: 0 success, 2 config error, 3 simulation aborted, 4 not
converged (only with ``--require-convergence``).
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .harness import (
    CONVERGENCE_EPS,
    CONVERGENCE_HOLD,
    TRACE_EVERY,
    SimulationAborted,
    convergence_time,
    plot_data,
    read_trace_csv,
    run_scenario,
    sweep,
    sweep_to_csv,
    write_trace_csv,
)
from .scenarios import BUILTINS, ConfigError, load_config, load_grid

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ABORTED = 3
EXIT_NOT_CONVERGED = 4


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.mode:
        cfg = replace(cfg, estimator_mode=args.mode)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    trace = run_scenario(cfg)
    out = Path(args.out) if args.out else Path(f"{cfg.name}.csv")
    write_trace_csv(out, trace, every=args.every)
    t_conv = convergence_time(trace, args.eps, args.hold)
    status = "not converged" if t_conv is None else f"converged at t={t_conv:.3f} s"
    print(f"{cfg.name}: {len(trace)} steps, {status}; trace written to {out}")
    if args.require_convergence and t_conv is None:
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.mode:
        cfg = replace(cfg, estimator_mode=args.mode)
    results = sweep(cfg, load_grid(args.grid), workers=args.workers)
    text = sweep_to_csv(results)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_scenarios(args) -> int:
    for name, (_, desc) in BUILTINS.items():
        print(f"{name:14s} {desc}")
    return EXIT_OK


def _cmd_plotdata(args) -> int:
    try:
        trace = read_trace_csv(args.trace)
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    text = plot_data(trace, args.fig)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="circletrack", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one scenario and write its trace")
    p.add_argument("config", help="built-in scenario name or TOML config file")
    p.add_argument("--out", help="trace CSV path (default: <scenario>.csv)")
    p.add_argument("--mode", choices=("sensor", "oracle"))
    p.add_argument("--seed", type=int)
    p.add_argument("--every", type=float, default=TRACE_EVERY, help="trace decimation in seconds")
    p.add_argument("--eps", type=float, default=CONVERGENCE_EPS)
    p.add_argument("--hold", type=float, default=CONVERGENCE_HOLD)
    p.add_argument("--require-convergence", action="store_true")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="run a scenario over a grid of gains")
    p.add_argument("config")
    p.add_argument("--grid", required=True, help="TOML grid file")
    p.add_argument("--mode", choices=("sensor", "oracle"))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("scenarios", help="list built-in scenarios")
    p.set_defaults(func=_cmd_scenarios)

    p = sub.add_parser("plotdata", help="extract the series behind a figure from a trace")
    p.add_argument("trace")
    p.add_argument("--fig", type=int, required=True, choices=(5, 6, 7, 12))
    p.add_argument("--out")
    p.set_defaults(func=_cmd_plotdata)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationAborted as exc:
        print(f"simulation aborted: {exc}", file=sys.stderr)
        return EXIT_ABORTED


if __name__ == "__main__":
    sys.exit(main())
