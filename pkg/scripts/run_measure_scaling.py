#!/usr/bin/env python3
"""Measure-scaling experiment: MC estimates of the plain and primed targets
on a geometric radius grid, with the frozen-log-factor slope fit.

    python scripts/run_measure_scaling.py --n 200000 --out out/measure
"""

import argparse
import sys

import numpy as np

from dirichlet_lab.cli import cli_main


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=200_000)
    ap.add_argument("--s-push", type=float, default=10.0)
    ap.add_argument("--r-min", type=float, default=0.02)
    ap.add_argument("--r-max", type=float, default=0.2)
    ap.add_argument("--points", type=int, default=8)
    ap.add_argument("--seed", type=int, default=20260808)
    ap.add_argument("--out", default="out/measure")
    args = ap.parse_args()

    r_values = ",".join(repr(float(r)) for r in np.geomspace(args.r_min, args.r_max, args.points))
    return cli_main(
        [
            "measure",
            "--kinds", "sub,primed",
            "--r-values", r_values,
            "--N", str(args.n),
            "--s-push", repr(args.s_push),
            "--seed", str(args.seed),
            "--out", args.out,
        ]
    )


if __name__ == "__main__":
    sys.exit(main())
