#!/usr/bin/env python3
"""Correspondence cross-validation: orbit heights of g_s L_A against the
exact uncovered set of the solvability scan, over a random ensemble.

    python scripts/run_crossval.py --ensemble 100 --S 20
"""

import argparse
import math
import sys

from dirichlet_lab import DimensionParams, LogDrift, MaxWithHalf, WeightPair
from dirichlet_lab.experiments import cross_validate_dani, dani_table
from dirichlet_lab.rng import sample_torus, substream


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ensemble", type=int, default=100)
    ap.add_argument("--S", type=float, default=20.0)
    ap.add_argument("--seed", type=int, default=20260808)
    args = ap.parse_args()

    dims = DimensionParams(1, 1)
    w = WeightPair.unweighted(1, 1)
    psi = MaxWithHalf(LogDrift(1.0, 0.5, t0=math.exp(4.0)))
    table = dani_table(psi, dims, args.S)
    print(f"scan horizon T = {table[-1][2]:.6g}")
    bad = 0
    for idx in range(args.ensemble):
        a = float(sample_torus(substream(args.seed, "crossval", idx), 1, 1)[0, 0])
        rep = cross_validate_dani(a, psi, dims, w, args.S, rate_table=table)
        if not rep.consistent:
            bad += 1
            print(f"counterexample at member {idx}: {rep.counterexamples[:2]}")
    print(f"counterexamples: {bad}/{args.ensemble}")
    return 0 if bad == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
