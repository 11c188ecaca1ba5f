#!/usr/bin/env python3
"""Convergence study on the manufactured problem.

The forcing -2*Gamma(alpha+1) + Gamma(alpha+2)*t has the known exact
solution t^(alpha-1)(1-t)^2, so sweeping grid and quadrature sizes shows
where the collocation error plateaus.
"""

import argparse
import time

import numpy as np

from fraksolve import GreenParams, ProblemSpec, solve


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=3.5)
    ap.add_argument("--sigma", type=float, default=0.5)
    args = ap.parse_args()

    print(f"alpha={args.alpha} sigma={args.sigma}")
    print(f"{'grid':>6} {'quad':>6} {'sup error':>12} {'seconds':>9}")
    for grid in (9, 17, 33, 65):
        for quad in (8, 16, 32, 48, 96):
            spec = ProblemSpec(
                GreenParams(args.alpha, args.sigma),
                "manufactured",
                lambda_claim=0.1,
                tau=1.0,
                grid_points=grid,
                quad_points=quad,
                enforce_cone=False,
            )
            t0 = time.perf_counter()
            result = solve(spec)
            dt = time.perf_counter() - t0
            tt = result.u.nodes
            exact = tt ** (args.alpha - 1.0) * (1 - tt) ** 2
            err = float(np.max(np.abs(result.u.values - exact)))
            print(f"{grid:>6} {quad:>6} {err:>12.3e} {dt:>9.3f}")


if __name__ == "__main__":
    main()
