"""Semi-Lagrangian time stepping on periodic grids.

A step traces the characteristic through each arrival node backwards over the
step interval with a single explicit Runge-Kutta (ERK) step, decomposes the
departure point into its east (1D) or north-east (2D) neighboring node plus a
normalized offset in [0, 1), and interpolates the previous state there with a
degree-p Lagrange stencil.  Application is matrix-free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Grid1D, Grid2D, WaveSpeed

SUPPORTED_DEGREES = (1, 3, 5)


def _check_degree(p: int) -> None:
    if p not in SUPPORTED_DEGREES:
        raise ValueError(f"unsupported interpolation degree p={p}; supported: {SUPPORTED_DEGREES}")


def stencil_extents(p: int) -> tuple[int, int]:
    """West and east extents of the odd-degree interpolation stencil."""
    _check_degree(p)
    return (p + 1) // 2, (p - 1) // 2


@dataclass(frozen=True)
class ErkScheme:
    """Explicit Runge-Kutta tableau of global order ``order``."""

    order: int
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    @property
    def n_stages(self) -> int:
        return len(self.b)


def erk_scheme(order: int) -> ErkScheme:
    """Catalog of ERK schemes used for departure-point tracing.

    order 1: forward Euler; order 3: Kutta's third-order scheme; order 5: the
    six-stage fifth-order method from Fehlberg's 4(5) pair (fifth-order
    weights).
    """
    if order == 1:
        a = np.zeros((1, 1))
        b = np.array([1.0])
        c = np.array([0.0])
    elif order == 3:
        a = np.array([[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [-1.0, 2.0, 0.0]])
        b = np.array([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0])
        c = np.array([0.0, 0.5, 1.0])
    elif order == 5:
        a = np.zeros((6, 6))
        a[1, 0] = 1.0 / 4.0
        a[2, :2] = [3.0 / 32.0, 9.0 / 32.0]
        a[3, :3] = [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0]
        a[4, :4] = [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0]
        a[5, :5] = [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0]
        b = np.array([16.0 / 135.0, 0.0, 6656.0 / 12825.0, 28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0])
        c = np.array([0.0, 1.0 / 4.0, 3.0 / 8.0, 12.0 / 13.0, 1.0, 0.5])
    else:
        raise ValueError(f"unsupported ERK order {order}; supported: 1, 3, 5")
    return ErkScheme(order, a, b, c)


def erk_trace_back(speed: WaveSpeed, arrival, t_start: float, dt: float, scheme: ErkScheme):
    """Trace characteristics backwards over [t_start, t_start + dt] with one
    ERK step of size -dt applied to the characteristic ODE.

    ``arrival`` is an array of arrival coordinates (a pair of arrays in 2D);
    returns the departure coordinate array(s).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    hs = -dt
    t1 = t_start + dt
    if speed.dim == 1:
        x = np.asarray(arrival, dtype=float)
        k = []
        for s in range(scheme.n_stages):
            xs = x.copy()
            for j in range(s):
                if scheme.a[s, j] != 0.0:
                    xs = xs + hs * scheme.a[s, j] * k[j]
            k.append(speed.alpha(xs, t1 + scheme.c[s] * hs))
        dep = x.copy()
        for s in range(scheme.n_stages):
            dep = dep + hs * scheme.b[s] * k[s]
        return dep
    x = np.asarray(arrival[0], dtype=float)
    y = np.asarray(arrival[1], dtype=float)
    kx, ky = [], []
    for s in range(scheme.n_stages):
        xs, ys = x.copy(), y.copy()
        for j in range(s):
            if scheme.a[s, j] != 0.0:
                xs = xs + hs * scheme.a[s, j] * kx[j]
                ys = ys + hs * scheme.a[s, j] * ky[j]
        ts = t1 + scheme.c[s] * hs
        kx.append(speed.alpha(xs, ys, ts))
        ky.append(speed.beta(xs, ys, ts))
    dep_x, dep_y = x.copy(), y.copy()
    for s in range(scheme.n_stages):
        dep_x = dep_x + hs * scheme.b[s] * kx[s]
        dep_y = dep_y + hs * scheme.b[s] * ky[s]
    return dep_x, dep_y


def decompose(grid: Grid1D, coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Decompose coordinates into (east neighbor index, offset eps).

    The east neighbor is the nearest node with x_E >= coordinate modulo the
    period, and eps = (x_E - coordinate) / h lies in [0, 1).  A rounding
    guard keeps eps in range at node-coincident departures.
    """
    s = np.mod(np.asarray(coords, dtype=float) - grid.x_lo, grid.length) / grid.h
    east_f = np.ceil(s)
    eps = east_f - s
    east = east_f.astype(np.int64)
    # rounding guards: eps is forced into [0, 1) with the matching index shift
    low = eps < 0.0
    if np.any(low):
        eps = np.where(low, 0.0, eps)
    high = eps >= 1.0
    if np.any(high):
        eps = np.where(high, eps - 1.0, eps)
        east = np.where(high, east - 1, east)
    return np.mod(east, grid.n_x), eps


def interp_weights(p: int, eps: np.ndarray) -> np.ndarray:
    """Lagrange weights over stencil offsets -l(p)..r(p) relative to the east
    neighbor, evaluated at offset -eps.

    Returns shape (len(eps), p + 1); rows sum to 1 up to rounding.
    """
    _check_degree(p)
    ell, r = stencil_extents(p)
    eps = np.atleast_1d(np.asarray(eps, dtype=float))
    z = -eps
    offsets = np.arange(-ell, r + 1)
    w = np.empty((eps.shape[0], p + 1))
    for col, j in enumerate(offsets):
        num = np.ones_like(z)
        den = 1.0
        for q in offsets:
            if q == j:
                continue
            num = num * (z - q)
            den *= j - q
        w[:, col] = num / den
    return w


@dataclass
class DepartureSet1D:
    """Departure data for one time step on a 1D grid.

    For each arrival node: east neighbor index, offset eps in [0, 1), and the
    signed physical displacement arrival - departure (unwrapped).
    """

    t_start: float
    dt: float
    east: np.ndarray
    eps: np.ndarray
    displacement: np.ndarray

    @classmethod
    def from_coords(cls, grid: Grid1D, arrival: np.ndarray, coords: np.ndarray,
                    t_start: float, dt: float) -> "DepartureSet1D":
        east, eps = decompose(grid, coords)
        return cls(t_start, dt, east, eps, arrival - coords)


@dataclass
class DepartureSet2D:
    """Departure data for one time step on a 2D grid (flat, x fastest)."""

    t_start: float
    dt: float
    east_x: np.ndarray
    east_y: np.ndarray
    eps: np.ndarray
    nu: np.ndarray
    displacement_x: np.ndarray
    displacement_y: np.ndarray

    @classmethod
    def from_coords(cls, grid: Grid2D, arrival_x, arrival_y, coords_x, coords_y,
                    t_start: float, dt: float) -> "DepartureSet2D":
        ax = grid.axis
        east_x, eps = decompose(ax, coords_x)
        east_y, nu = decompose(ax, coords_y)
        return cls(t_start, dt, east_x, east_y, eps, nu,
                   arrival_x - coords_x, arrival_y - coords_y)


def erk_departures(grid, speed: WaveSpeed, t_start: float, dt: float, scheme: ErkScheme):
    """Build the departure set of one step by ERK backward tracing from all
    grid nodes."""
    if grid.dim == 1:
        nodes = grid.nodes()
        coords = erk_trace_back(speed, nodes, t_start, dt, scheme)
        return DepartureSet1D.from_coords(grid, nodes, coords, t_start, dt)
    x, y = grid.nodes()
    cx, cy = erk_trace_back(speed, (x, y), t_start, dt, scheme)
    return DepartureSet2D.from_coords(grid, x, y, cx, cy, t_start, dt)


def sl_step(grid, departures, p: int, u: np.ndarray) -> np.ndarray:
    """Apply one semi-Lagrangian step: interpolate u at the departure points."""
    if u.shape[-1] != grid.n_points:
        raise ValueError(f"state length {u.shape[-1]} does not match grid size {grid.n_points}")
    if grid.dim == 1:
        idx, w = sl_stencil_1d(grid, departures, p)
        return (u[idx] * w).sum(axis=1)
    return _sl_step_2d(grid, departures, p, u)


def sl_stencil_1d(grid: Grid1D, dep: DepartureSet1D, p: int):
    """Gather indices and weights of the 1D step as (n_x, p+1) arrays."""
    ell, r = stencil_extents(p)
    w = interp_weights(p, dep.eps)
    idx = np.mod(dep.east[:, None] + np.arange(-ell, r + 1)[None, :], grid.n_x)
    return idx, w


def _sl_step_2d(grid: Grid2D, dep: DepartureSet2D, p: int, u: np.ndarray) -> np.ndarray:
    ell, r = stencil_extents(p)
    n = grid.n_x
    wx = interp_weights(p, dep.eps)
    wy = interp_weights(p, dep.nu)
    offsets = np.arange(-ell, r + 1)
    cols = [np.mod(dep.east_x + j, n) for j in offsets]
    rows = [np.mod(dep.east_y + j, n) * n for j in offsets]
    out = np.zeros(grid.n_points)
    for jy in range(p + 1):
        acc = np.zeros(grid.n_points)
        base = rows[jy]
        for jx in range(p + 1):
            acc += wx[:, jx] * u[base + cols[jx]]
        out += wy[:, jy] * acc
    return out
