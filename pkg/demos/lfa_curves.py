"""Fourier convergence-factor curves for the two coarse-grid operators.

For constant wave speed the two-level convergence factor rho(c) can be
estimated per CFL number c from operator symbols.  The rediscretized coarse
operator has rho > 1 on large CFL intervals (divergence); the corrected
operator stays well below 1 everywhere.

    python demos/lfa_curves.py -p 1 -m 4
"""

import argparse

import numpy as np

from mgrit_advect import rho_estimate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-p", type=int, default=1, choices=(1, 3, 5))
    ap.add_argument("-m", type=int, default=4)
    ap.add_argument("--c-step", type=float, default=0.05)
    args = ap.parse_args()

    print(f"rho(c) for p={args.p}, m={args.m}")
    print(f"{'c':>6} {'rediscretized':>14} {'corrected':>10}")
    for c in np.arange(0.0, 1.0 + 1e-9, args.c_step):
        r_red = rho_estimate(args.p, args.m, float(c), "rediscretized")
        r_cor = rho_estimate(args.p, args.m, float(c), "corrected")
        marker = "  <- divergent" if r_red > 1.0 else ""
        print(f"{c:>6.2f} {r_red:>14.4f} {r_cor:>10.4f}{marker}")


if __name__ == "__main__":
    main()
