"""Decay order of the ideal-vs-coarse operator gap under mesh refinement.

Measures how closely a single coarse semi-Lagrangian step (optionally with
the implicit truncation-error correction) matches the composition of the
fine steps it replaces, on a smooth state with near-exactly located
departure points.  The implicit correction buys one extra order in h when
the wave speed is space-independent, or when dt = O(h).

    python demos/truncation_orders.py -p 1
"""

import argparse

from mgrit_advect import Grid1D, fit_order, get_wave_speed, measure_ideal_gap


def run_case(p, speed_id, correction, dt_of_h):
    speed = get_wave_speed(speed_id)
    points = []
    for k in range(7, 12):
        grid = Grid1D(2**k)
        dt = 0.85 * grid.h if dt_of_h else 0.85
        points.append((grid.h, measure_ideal_gap(p, 4, grid, dt, speed, correction)))
    return fit_order(points)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-p", type=int, default=1, choices=(1, 3, 5))
    args = ap.parse_args()

    cases = [
        ("C2", "identity", True, "identity,  dt=0.85h"),
        ("C2", "backward_euler", True, "corrected, dt=0.85h"),
        ("C3", "backward_euler", True, "corrected, dt=0.85h"),
        ("C3", "backward_euler", False, "corrected, dt=0.85  "),
    ]
    print(f"gap decay orders for p={args.p} (m=4)")
    for speed_id, correction, dt_of_h, label in cases:
        fit = run_case(args.p, speed_id, correction, dt_of_h)
        print(f"  {speed_id} {label}: slope {fit.slope:.2f}")


if __name__ == "__main__":
    main()
