"""High-accuracy references used to verify the production code paths.

Characteristics are traced here with classical RK4 over many fixed substeps,
which is accuracy-dominant over every quantity it is compared against.  The
ideal coarse step composes fine steps directly.  The truncation-gap
measurement checks how closely the (corrected) coarse step matches that
composition under mesh refinement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .coarse_correction import (CorrectionField, GmresConfig, apply_ImSD,
                                derivative_stencil, gmres_solve, phi_field)
from .core import Grid1D, WaveSpeed, initial_condition
from .semi_lagrangian import DepartureSet1D, DepartureSet2D, sl_step

_MAX_SUBSTEPS = 4096
_AGREE_TOL = 1e-12


def _rk4_back(speed: WaveSpeed, arrival, t_start: float, dt: float, substeps: int):
    hs = -dt / substeps
    if speed.dim == 1:
        x = np.asarray(arrival, dtype=float).copy()
        t = t_start + dt
        for _ in range(substeps):
            k1 = speed.alpha(x, t)
            k2 = speed.alpha(x + 0.5 * hs * k1, t + 0.5 * hs)
            k3 = speed.alpha(x + 0.5 * hs * k2, t + 0.5 * hs)
            k4 = speed.alpha(x + hs * k3, t + hs)
            x = x + hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += hs
        return x
    x = np.asarray(arrival[0], dtype=float).copy()
    y = np.asarray(arrival[1], dtype=float).copy()
    t = t_start + dt
    for _ in range(substeps):
        k1x, k1y = speed.alpha(x, y, t), speed.beta(x, y, t)
        xm, ym, tm = x + 0.5 * hs * k1x, y + 0.5 * hs * k1y, t + 0.5 * hs
        k2x, k2y = speed.alpha(xm, ym, tm), speed.beta(xm, ym, tm)
        xm, ym = x + 0.5 * hs * k2x, y + 0.5 * hs * k2y
        k3x, k3y = speed.alpha(xm, ym, tm), speed.beta(xm, ym, tm)
        xe, ye, te = x + hs * k3x, y + hs * k3y, t + hs
        k4x, k4y = speed.alpha(xe, ye, te), speed.beta(xe, ye, te)
        x = x + hs / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        y = y + hs / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        t += hs
    return x, y


def trace_back_exact(speed: WaveSpeed, arrival, t_start: float, dt: float,
                     substeps: int | None = None):
    """Near-exact backward characteristic tracing.

    Fixed-substep RK4; without an explicit substep count, substeps are doubled
    until two successive results agree to 1e-12 (capped at 4096).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if substeps is not None:
        return _rk4_back(speed, arrival, t_start, dt, substeps)
    n = 256
    prev = _rk4_back(speed, arrival, t_start, dt, n)
    while n < _MAX_SUBSTEPS:
        n *= 2
        cur = _rk4_back(speed, arrival, t_start, dt, n)
        if speed.dim == 1:
            gap = np.max(np.abs(cur - prev))
        else:
            gap = max(np.max(np.abs(cur[0] - prev[0])), np.max(np.abs(cur[1] - prev[1])))
        if gap < _AGREE_TOL:
            return cur
        prev = cur
    return prev


def exact_departures(grid, speed: WaveSpeed, t_start: float, dt: float):
    """Departure set with near-exactly located departure points."""
    if grid.dim == 1:
        nodes = grid.nodes()
        coords = trace_back_exact(speed, nodes, t_start, dt)
        return DepartureSet1D.from_coords(grid, nodes, coords, t_start, dt)
    x, y = grid.nodes()
    cx, cy = trace_back_exact(speed, (x, y), t_start, dt)
    return DepartureSet2D.from_coords(grid, x, y, cx, cy, t_start, dt)


def ideal_coarse_step(grid, fine_departures: Sequence, p: int, u: np.ndarray) -> np.ndarray:
    """Compose the fine semi-Lagrangian steps spanning one coarse interval."""
    for dep in fine_departures:
        u = sl_step(grid, dep, p, u)
    return u


def measure_ideal_gap(p: int, m: int, grid: Grid1D, dt: float, speed: WaveSpeed,
                      correction: str = "identity") -> float:
    """Normalized sup-norm gap between the ideal coarse step and the
    (optionally corrected) coarse semi-Lagrangian step on a smooth state.

    Departure points are located near-exactly; ``correction`` is "identity"
    or "backward_euler" (exact solve via full-dimension GMRES).  The gap is
    normalized by the sup norm of the correction coefficient vector, so an
    integer CFL (all-zero coefficients) is rejected.
    """
    if correction not in ("identity", "backward_euler"):
        raise ValueError(f"unknown correction {correction!r}")
    u = initial_condition(grid)
    fine = [exact_departures(grid, speed, k * dt, dt) for k in range(m)]
    coarse = exact_departures(grid, speed, 0.0, m * dt)
    ideal = ideal_coarse_step(grid, fine, p, u)
    coarse_u = sl_step(grid, coarse, p, u)
    phi = phi_field(p, coarse, fine)
    phi_norm = float(np.max(np.abs(phi.x)))
    if phi_norm == 0.0:
        raise ValueError("gap normalization degenerate: correction coefficients vanish")
    if correction == "backward_euler":
        stencil = derivative_stencil(p)
        cfg = GmresConfig(max_iters=grid.n_x, tol=1e-14)
        coarse_u, _ = gmres_solve(lambda v: apply_ImSD(phi, stencil, v), coarse_u, cfg)
    return float(np.max(np.abs(ideal - coarse_u))) / phi_norm


@dataclass(frozen=True)
class OrderFit:
    """Least-squares log-log slope of gap-vs-h data."""

    h: np.ndarray
    gap: np.ndarray
    slope: float
    residual: float


def fit_order(points: Sequence[tuple[float, float]]) -> OrderFit:
    """Fit log(gap) = slope * log(h) + const over at least three points."""
    if len(points) < 3:
        raise ValueError("order fit needs at least three points")
    h = np.array([p[0] for p in points], dtype=float)
    gap = np.array([p[1] for p in points], dtype=float)
    if np.any(gap <= 0.0):
        raise ValueError("order fit requires positive gaps")
    coeffs, res, *_ = np.polyfit(np.log(h), np.log(gap), 1, full=True)
    residual = float(res[0]) if len(res) else 0.0
    return OrderFit(h, gap, float(coeffs[0]), residual)
