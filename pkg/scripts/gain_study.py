#!/usr/bin/env python3
"""Sweep k1 (with k2, k3 fixed) from the outside start pose and tabulate
convergence time, peak |s| and the chattering index.

Usage::

    python scripts/gain_study.py --k1 0.01 0.05 0.1 0.2 --workers 4
"""

import argparse
import sys
from dataclasses import replace

from circletrack.harness import sweep, sweep_to_csv
from circletrack.scenarios import builtin
from circletrack.smc import Gains


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--base", default="paper-b1", help="built-in scenario supplying everything but the gains")
    parser.add_argument("--k1", type=float, nargs="+", default=[0.01, 0.05, 0.1])
    parser.add_argument("--k2", type=float, default=0.2)
    parser.add_argument("--k3", type=float, default=1.0)
    parser.add_argument("--phi", type=float, default=0.05)
    parser.add_argument("--mode", choices=("sensor", "oracle"), default="sensor")
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args(argv)

    cfg = replace(builtin(args.base), estimator_mode=args.mode)
    grid = [Gains(k1, args.k2, args.k3, args.phi) for k1 in args.k1]
    sys.stdout.write(sweep_to_csv(sweep(cfg, grid, workers=args.workers)))


if __name__ == "__main__":
    main()
