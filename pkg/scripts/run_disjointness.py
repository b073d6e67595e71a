#!/usr/bin/env python3
"""Disjointness verification: constructed members of the thickened primed
target must not return to it under k = 1..J flow steps.

    python scripts/run_disjointness.py --samples 1000
"""

import argparse
import math
import sys

from dirichlet_lab import DimensionParams, WeightPair, verify_disjointness


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r", type=float, default=math.exp(-8.0))
    ap.add_argument("--samples", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=20260808)
    args = ap.parse_args()

    rep = verify_disjointness(
        args.r, DimensionParams(1, 1), WeightPair.unweighted(1, 1),
        args.samples, seed=args.seed,
    )
    print(f"r = {rep.r:.6g}, J = {rep.J}, violations = {rep.violation_count}/{rep.samples}")
    if rep.violations:
        print("witnesses:", rep.violations[:10])
    return 0 if rep.violation_count == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
