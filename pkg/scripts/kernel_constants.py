#!/usr/bin/env python3
"""Tabulate the contraction-gate constant over the parameter plane.

The solvability condition needs lambda <= 1/N where N is the maximum of
the weighted kernel integral; this prints N, its location, and 1/N over
an (alpha, sigma) grid.
"""

import argparse

import numpy as np

from fraksolve import GreenParams, green_weight_integral_max


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alphas", type=float, nargs="+", default=[3.01, 3.25, 3.5, 3.75, 4.0])
    ap.add_argument("--sigmas", type=float, nargs="+", default=[0.1, 0.3, 0.5, 0.7, 0.9])
    args = ap.parse_args()

    print(f"{'alpha':>6} {'sigma':>6} {'N':>14} {'t_star':>10} {'1/N':>12}")
    for alpha in args.alphas:
        for sigma in args.sigmas:
            n_value, t_star = green_weight_integral_max(GreenParams(alpha, sigma))
            print(f"{alpha:>6} {sigma:>6} {n_value:>14.6e} {t_star:>10.6f} {1.0 / n_value:>12.4f}")


if __name__ == "__main__":
    main()
