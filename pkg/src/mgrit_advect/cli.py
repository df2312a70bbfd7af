"""Experiment command line: single solves, table sweeps, convergence-factor
curves, and verification batteries, with JSON/CSV output.

Subcommands: run, table, lfa, verify.  Exit codes: 0 success (a reported
divergence is still success), 2 usage error, 3 internal error.  The default
seed comes from the MGRIT_ADVECT_SEED environment variable when set.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict

import numpy as np

from .core import get_wave_speed
from .fourier import phi_scalar, rho_estimate
from .mgrit import SolverConfig, solve
from .oracle import fit_order, measure_ideal_gap
from .coarse_correction import derivative_stencil, stencil_symbol
from .backtracking import backtracked_departures
from .semi_lagrangian import erk_departures, erk_scheme
from .core import Grid1D, Grid2D

P_VALUES = (1, 3, 5)
M_VALUES = (4, 8, 16)

TABLES = {
    "two_level_1d": {
        "dim": 1,
        "speeds": ("C1", "C2", "C3"),
        "meshes": ((2**8, 2**10), (2**10, 2**12), (2**12, 2**14)),
        "two_level": True,
        "baseline_meshes": (),
    },
    "multilevel_1d": {
        "dim": 1,
        "speeds": ("C1", "C2", "C3"),
        "meshes": ((2**8, 2**10), (2**10, 2**12), (2**12, 2**14)),
        "two_level": False,
        "baseline_meshes": (),
    },
    "multilevel_2d": {
        "dim": 2,
        "speeds": ("C4", "C5"),
        "meshes": ((2**6, 2**10), (2**7, 2**11), (2**8, 2**12), (2**9, 2**13)),
        "two_level": False,
        # the rediscretized baseline is reported for the two smallest meshes
        "baseline_meshes": ((2**6, 2**10), (2**7, 2**11)),
    },
}

DEFAULT_CAPS = {
    "two_level_1d": 2**18,
    "multilevel_1d": 2**18,
    "multilevel_2d": 2**22,
}


def parse_size(text: str) -> int:
    """Parse a space-time size like '2^8x2^10', '(2^6)^2x2^10', or '262144'.

    'x'-separated factors are multiplied; '^' is left-associative
    exponentiation, so (2^6)^2 and 2^6^2 agree.
    """
    total = 1
    for token in text.replace("(", "").replace(")", "").lower().split("x"):
        parts = token.split("^")
        try:
            value = int(parts[0])
            for e in parts[1:]:
                value = value ** int(e)
        except ValueError:
            raise ValueError(f"malformed size expression {text!r}") from None
        total *= value
    return total


def default_seed() -> int:
    return int(os.environ.get("MGRIT_ADVECT_SEED", "0"))


def _schedule(text: str):
    if "," in text:
        return [int(tok) for tok in text.split(",")]
    return int(text)


def config_from_namespace(args: argparse.Namespace) -> SolverConfig:
    """Build a SolverConfig from CLI flags plus an optional JSON config file;
    flags that were given explicitly override file entries."""
    values = {
        "dim": args.dim,
        "wave_speed": args.wave_speed,
        "p": args.p,
        "r": args.r,
        "n_x": args.nx,
        "n_t": args.nt,
        "dt": args.dt,
        "schedule": _schedule(args.schedule) if isinstance(args.schedule, str) else args.schedule,
        "max_levels": args.max_levels,
        "operator_kind": args.operator,
        "departure_policy": args.departure_policy,
        "gmres_mode": args.gmres_mode,
        "relaxation": args.relaxation,
        "seed": args.seed,
        "rtol": args.rtol,
        "max_iters": args.max_iters,
    }
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as fh:
            file_values = json.load(fh)
        unknown = set(file_values) - set(values)
        if unknown:
            raise ValueError(f"unknown config file keys: {sorted(unknown)}")
        for key, val in file_values.items():
            if key not in args.explicit:
                values[key] = val
    if values["n_x"] is None or values["n_t"] is None:
        raise ValueError("n_x and n_t are required (flags --nx/--nt or config file)")
    return SolverConfig(**values)


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# subcommands


def cmd_run(args: argparse.Namespace) -> int:
    cfg = config_from_namespace(args)
    report, _ = solve(cfg)
    out = args.output
    payload = {
        "config": {k: v for k, v in asdict(cfg).items()},
        "iterations": report.iterations,
        "status": report.status,
        "final_factor": report.final_factor,
        "wall_time": report.wall_time,
        "residual_norms": [float(v) for v in report.residual_norms],
    }
    with open(out + ".json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
    _write_csv(out + ".csv", ["iteration", "residual_norm"],
               [[k, repr(float(v))] for k, v in enumerate(report.residual_norms)])
    print(f"{cfg.wave_speed} p={cfg.p} {cfg.n_x}x{cfg.n_t}: "
          f"{report.status} in {report.iterations} iterations")
    return 0


def _cell_config(table: dict, speed: str, p: int, m: int, mesh: tuple[int, int],
                 seed: int, operator_kind: str = "corrected",
                 departure_policy: str = "backtrack") -> SolverConfig:
    n_x, n_t = mesh
    return SolverConfig(
        n_x=n_x, n_t=n_t, dim=table["dim"], wave_speed=speed, p=p,
        schedule=m, max_levels=2 if table["two_level"] else None,
        operator_kind=operator_kind, departure_policy=departure_policy,
        seed=seed,
    )


def cmd_table(args: argparse.Namespace) -> int:
    table = TABLES[args.table_id]
    cap = parse_size(args.size_cap) if args.size_cap else DEFAULT_CAPS[args.table_id]
    header = ["p", "m", "wave_speed", "n_x", "n_t", "iterations", "status"]
    if args.table_id == "multilevel_2d":
        header += ["baseline_iterations", "baseline_status"]
    rows = []
    for p in P_VALUES:
        for speed in table["speeds"]:
            for mesh in table["meshes"]:
                n_x, n_t = mesh
                if n_x ** table["dim"] * n_t > cap:
                    continue  # skipped cells are omitted from the CSV
                for m in M_VALUES:
                    cfg = _cell_config(table, speed, p, m, mesh, args.seed)
                    report, _ = solve(cfg)
                    row = [p, m, speed, n_x, n_t, report.iterations, report.status]
                    if args.table_id == "multilevel_2d":
                        if mesh in table["baseline_meshes"]:
                            base_cfg = _cell_config(
                                table, speed, p, m, mesh, args.seed,
                                operator_kind="rediscretized",
                                departure_policy="erk_substeps")
                            base, _ = solve(base_cfg)
                            row += [base.iterations, base.status]
                        else:
                            row += ["", ""]
                    rows.append(row)
                    print(",".join(str(v) for v in row))
    _write_csv(args.output + ".csv", header, rows)
    return 0


def cmd_lfa(args: argparse.Namespace) -> int:
    m_list = [int(tok) for tok in args.m_list.split(",")]
    c_grid = np.arange(args.c_min, args.c_max + 0.5 * args.c_step, args.c_step)
    rows = []
    for m in m_list:
        for c in c_grid:
            rho = rho_estimate(args.p, m, float(c), args.coarse_kind)
            rows.append([args.p, m, repr(round(float(c), 12)), repr(rho), args.coarse_kind])
    _write_csv(args.output + ".csv", ["p", "m", "c", "rho", "coarse_kind"], rows)
    print(f"wrote {len(rows)} rows to {args.output}.csv")
    return 0


def _verify_truncation() -> list[dict]:
    """SM-style gap slopes for p = 1: identity correction decays one order
    slower than the implicit correction; the space-varying speed loses the
    extra order when dt stays O(1)."""
    p = 1
    cases = [
        ("C2_identity_dt_h", "C2", "identity", True, p + 1),
        ("C2_corrected_dt_h", "C2", "backward_euler", True, p + 2),
        ("C3_corrected_dt_h", "C3", "backward_euler", True, p + 2),
        ("C3_corrected_dt_fixed", "C3", "backward_euler", False, p + 1),
    ]
    checks = []
    for name, speed_id, correction, dt_scales, expected in cases:
        speed = get_wave_speed(speed_id)
        points = []
        # the ladder starts at 2^7: coarser grids sit in the preasymptotic regime
        for k in range(7, 12):
            grid = Grid1D(2**k)
            dt = 0.85 * grid.h if dt_scales else 0.85
            points.append((grid.h, measure_ideal_gap(p, 4, grid, dt, speed, correction)))
        slope = fit_order(points).slope
        checks.append({"check": name, "slope": slope, "expected": expected,
                       "passed": bool(abs(slope - expected) <= 0.3)})
    return checks


def _verify_stability() -> list[dict]:
    """Magnitude of the implicit correction factor's symbol stays <= 1."""
    omega = -np.pi + 2.0 * np.pi * np.arange(512) / 512
    checks = []
    for p in P_VALUES:
        d = stencil_symbol(derivative_stencil(p), omega)
        worst = 0.0
        for m in (2, 4, 8, 16, 32):
            for c in np.arange(0.0, 2.0001, 0.01):
                phi = phi_scalar(p, m, float(c))
                worst = max(worst, float(np.max(np.abs(1.0 / (1.0 - phi * d)))))
        checks.append({"check": f"B_symbol_p{p}", "max_magnitude": worst,
                       "passed": bool(worst <= 1.0 + 1e-12)})
    return checks


def _verify_footnote_equivalence() -> list[dict]:
    """For constant wave speed, backtracked coarse departure points coincide
    with the exact constant-displacement departure points."""
    checks = []
    for speed_id, grid in (("C1", Grid1D(64)), ("C4", Grid2D(32))):
        speed = get_wave_speed(speed_id)
        dt = 0.85 * grid.h
        m = 4
        scheme = erk_scheme(1)
        children = [erk_departures(grid, speed, k * dt, dt, scheme) for k in range(m)]
        coarse = backtracked_departures(grid, children, 0.0, m * dt)
        if grid.dim == 1:
            dev = float(np.max(np.abs(coarse.displacement - m * dt)))
        else:
            dev = max(float(np.max(np.abs(coarse.displacement_x - m * dt))),
                      float(np.max(np.abs(coarse.displacement_y - m * dt))))
        checks.append({"check": f"backtrack_exact_{speed_id}", "max_deviation": dev,
                       "passed": bool(dev < 1e-12)})
    return checks


VERIFY_SUITES = {
    "truncation": _verify_truncation,
    "stability": _verify_stability,
    "footnote_equivalence": _verify_footnote_equivalence,
}


def cmd_verify(args: argparse.Namespace) -> int:
    checks = VERIFY_SUITES[args.suite]()
    for check in checks:
        print(f"[{'PASS' if check['passed'] else 'FAIL'}] {check['check']}")
    payload = {"suite": args.suite, "checks": checks,
               "passed": all(c["passed"] for c in checks)}
    with open(args.output + ".json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _explicit_dests(parser: argparse.ArgumentParser, argv: list[str]) -> set[str]:
    """Destinations of options literally present on the command line (used to
    decide which flags override config-file entries)."""
    given = set(argv)
    dests = set()
    for action in parser._actions:
        if any(opt in given for opt in action.option_strings):
            dests.add(action.dest)
    return dests


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mgrit-advect",
        description="MGRIT experiments for semi-Lagrangian advection")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="single MGRIT solve")
    run.add_argument("--config", help="JSON config file; flags override its entries")
    run.add_argument("--dim", type=int, choices=(1, 2), default=1)
    run.add_argument("--wave-speed", default="C1")
    run.add_argument("-p", type=int, default=1, help="interpolation degree (odd)")
    run.add_argument("-r", type=int, default=None, help="ERK order (default: p)")
    run.add_argument("--nx", type=int, default=None)
    run.add_argument("--nt", type=int, default=None)
    run.add_argument("--dt", type=float, default=None, help="step size (default 0.85 h)")
    run.add_argument("--schedule", default="4",
                     help="coarsening factor, or comma list per level")
    run.add_argument("--max-levels", type=int, default=None)
    run.add_argument("--operator", default="corrected",
                     choices=("rediscretized", "corrected", "ideal", "forward_euler"))
    run.add_argument("--departure-policy", default="backtrack",
                     choices=("backtrack", "erk_rediscretized", "erk_substeps"))
    run.add_argument("--gmres-mode", default=None, choices=("fixed", "tolerance"))
    run.add_argument("--relaxation", default="FCF", choices=("FCF", "F"))
    run.add_argument("--seed", type=int, default=default_seed())
    run.add_argument("--rtol", type=float, default=1e-10)
    run.add_argument("--max-iters", type=int, default=100)
    run.add_argument("-o", "--output", default="run")
    run.set_defaults(func=cmd_run)

    table = sub.add_parser("table", help="iteration-count table sweep")
    table.add_argument("table_id", choices=sorted(TABLES))
    table.add_argument("--size-cap", default=None,
                       help="max space-time points per cell, e.g. 2^8x2^10")
    table.add_argument("--seed", type=int, default=default_seed())
    table.add_argument("-o", "--output", default="table")
    table.set_defaults(func=cmd_table)

    lfa = sub.add_parser("lfa", help="convergence-factor curve sweep")
    lfa.add_argument("-p", type=int, default=1)
    lfa.add_argument("--m-list", default="2,4,8,16,32")
    lfa.add_argument("--c-min", type=float, default=0.0)
    lfa.add_argument("--c-max", type=float, default=1.0)
    lfa.add_argument("--c-step", type=float, default=0.01)
    lfa.add_argument("--coarse-kind", default="corrected",
                     choices=("rediscretized", "corrected"))
    lfa.add_argument("-o", "--output", default="lfa")
    lfa.set_defaults(func=cmd_lfa)

    verify = sub.add_parser("verify", help="verification batteries")
    verify.add_argument("suite", choices=sorted(VERIFY_SUITES))
    verify.add_argument("-o", "--output", default="verify")
    verify.set_defaults(func=cmd_verify)
    parser._run_parser = run
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.explicit = _explicit_dests(parser._run_parser, argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
