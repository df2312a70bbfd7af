"""Coarse-grid departure points by recycling fine-level characteristic data.

A coarse characteristic is walked backwards through the fine substeps: its
position at each fine time is estimated by interpolating the stored fine
departure data of the neighboring nodes (linear in 1D, bilinear in 2D) at the
current position.  Interpolation acts on displacements rather than absolute
coordinates, which stays smooth across the periodic seam; the two forms agree
whenever no wrap intervenes.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import Grid1D, Grid2D
from .semi_lagrangian import DepartureSet1D, DepartureSet2D, decompose


def backtrack_1d(grid: Grid1D, child_sets: Sequence[DepartureSet1D]) -> tuple[np.ndarray, int]:
    """Estimate coarse departure coordinates for all arrival nodes.

    ``child_sets`` are the m child-level departure sets spanning the coarse
    step, ordered forward in time.  Returns (departure coordinates, number of
    interpolation updates performed).
    """
    m = len(child_sets)
    if m < 1:
        raise ValueError("backtracking requires at least one child step")
    nodes = grid.nodes()
    coords = nodes - child_sets[m - 1].displacement
    updates = 0
    for k in range(m - 2, -1, -1):
        disp = child_sets[k].displacement
        east, eps = decompose(grid, coords)
        west = np.mod(east - 1, grid.n_x)
        coords = coords - ((1.0 - eps) * disp[east] + eps * disp[west])
        updates += 1
    return coords, updates


def backtrack_2d(grid: Grid2D, child_sets: Sequence[DepartureSet2D]) -> tuple[np.ndarray, np.ndarray, int]:
    """2D analogue of backtrack_1d using bilinear interpolation over the four
    neighboring nodes of the current position.

    Returns (x coordinates, y coordinates, update count).
    """
    m = len(child_sets)
    if m < 1:
        raise ValueError("backtracking requires at least one child step")
    n = grid.n_x
    ax = grid.axis
    x, y = grid.nodes()
    cx = x - child_sets[m - 1].displacement_x
    cy = y - child_sets[m - 1].displacement_y
    updates = 0
    for k in range(m - 2, -1, -1):
        dx = child_sets[k].displacement_x
        dy = child_sets[k].displacement_y
        east, eps = decompose(ax, cx)
        north, nu = decompose(ax, cy)
        west = np.mod(east - 1, n)
        south = np.mod(north - 1, n)
        ne = north * n + east
        nw = north * n + west
        se = south * n + east
        sw = south * n + west
        w_ne = (1.0 - eps) * (1.0 - nu)
        w_nw = eps * (1.0 - nu)
        w_se = (1.0 - eps) * nu
        w_sw = eps * nu
        cx = cx - (w_ne * dx[ne] + w_nw * dx[nw] + w_se * dx[se] + w_sw * dx[sw])
        cy = cy - (w_ne * dy[ne] + w_nw * dy[nw] + w_se * dy[se] + w_sw * dy[sw])
        updates += 1
    return cx, cy, updates


def backtracked_departures(grid, child_sets: Sequence, t_start: float, dt: float):
    """Build the departure set of one coarse step from its child sets."""
    if grid.dim == 1:
        coords, _ = backtrack_1d(grid, child_sets)
        return DepartureSet1D.from_coords(grid, grid.nodes(), coords, t_start, dt)
    cx, cy, _ = backtrack_2d(grid, child_sets)
    x, y = grid.nodes()
    return DepartureSet2D.from_coords(grid, x, y, cx, cy, t_start, dt)
