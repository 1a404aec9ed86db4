#!/usr/bin/env python3
"""Run every built-in scenario, write its trace and the figure series, and
print a convergence summary.

Usage::

    python scripts/reproduce_builtins.py --outdir results
"""

import argparse
import time
from pathlib import Path

from circletrack.harness import (
    FIGURE_COLUMNS,
    chattering_index,
    convergence_time,
    plot_data,
    run_scenario,
    write_trace_csv,
)
from circletrack.scenarios import BUILTINS, builtin


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--outdir", default="results")
    parser.add_argument("--only", nargs="*", choices=sorted(BUILTINS), help="subset of scenarios")
    args = parser.parse_args(argv)

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    print(f"{'scenario':14s} {'t_conv [s]':>10s} {'chatter':>10s} {'wall [s]':>8s}")
    for name in args.only or BUILTINS:
        cfg = builtin(name)
        start = time.perf_counter()
        trace = run_scenario(cfg)
        wall = time.perf_counter() - start
        write_trace_csv(outdir / f"{name}.csv", trace)
        for fig in FIGURE_COLUMNS:
            (outdir / f"{name}_fig{fig}.csv").write_text(plot_data(trace, fig), encoding="utf-8")
        t = convergence_time(trace)
        shown = "-" if t is None else f"{t:.3f}"
        print(f"{name:14s} {shown:>10s} {chattering_index(trace):10.3e} {wall:8.2f}")


if __name__ == "__main__":
    main()
