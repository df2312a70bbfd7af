"""Linear multigrid-reduction-in-time solver for semi-Lagrangian advection.

The solver treats the whole one-step space-time system at once: FCF (or F)
relaxation zeroes residuals locally, the residual is restricted to the coarse
time grid by injection, a coarse error equation is solved recursively with a
cheaper coarse step operator, and the error is injected back at C-points.
Coarse operators are plain rediscretized semi-Lagrangian steps, corrected
steps with the implicit truncation-error factor, the explicit (forward Euler)
variant, or the ideal product of finer-level steps.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .backtracking import backtracked_departures
from .coarse_correction import (CorrectionField, GmresConfig, apply_ImSD,
                                apply_IpSD, derivative_stencil, gmres_solve,
                                phi_field, sigma_accumulate)
from .core import (Grid1D, Grid2D, WaveSpeed, get_wave_speed,
                   initial_condition, space_time_norm)
from .semi_lagrangian import (DepartureSet1D, erk_departures, erk_scheme,
                              erk_trace_back, sl_step, sl_stencil_1d)

try:
    from . import _kernels
except ImportError:  # numba unavailable: fall back to the numpy path
    _kernels = None

OPERATOR_KINDS = ("rediscretized", "corrected", "ideal", "forward_euler")
DEPARTURE_POLICIES = ("backtrack", "erk_rediscretized", "erk_substeps")
DEFAULT_CFL = 0.85


@dataclass(frozen=True)
class SolverConfig:
    """Full description of one MGRIT solve."""

    n_x: int
    n_t: int
    dim: int = 1
    wave_speed: str = "C1"
    p: int = 1
    r: int | None = None  # ERK order; defaults to p
    dt: float | None = None  # defaults to 0.85 h
    schedule: int | Sequence[int] = 4
    max_levels: int | None = None
    operator_kind: str = "corrected"
    departure_policy: str = "backtrack"
    gmres_mode: str | None = None  # "fixed" | "tolerance" | None (auto)
    relaxation: str = "FCF"
    seed: int = 0
    rtol: float = 1e-10
    max_iters: int = 100
    divergence_factor: float = 1e6

    def __post_init__(self):
        if self.p % 2 == 0:
            raise ValueError("interpolation degree p must be odd")
        if self.operator_kind not in OPERATOR_KINDS:
            raise ValueError(f"unknown operator kind {self.operator_kind!r}")
        if self.departure_policy not in DEPARTURE_POLICIES:
            raise ValueError(f"unknown departure policy {self.departure_policy!r}")
        if self.relaxation not in ("FCF", "F"):
            raise ValueError("relaxation must be 'FCF' or 'F'")
        if self.gmres_mode not in (None, "fixed", "tolerance"):
            raise ValueError("gmres_mode must be 'fixed', 'tolerance', or None")
        speed = (get_wave_speed(self.wave_speed)
                 if isinstance(self.wave_speed, str) else self.wave_speed)
        if speed.dim != self.dim:
            raise ValueError(
                f"wave speed {speed.name} is {speed.dim}D but config is {self.dim}D")

    @property
    def erk_order(self) -> int:
        return self.p if self.r is None else self.r

    def schedule_factor(self, level_index: int) -> int:
        if isinstance(self.schedule, int):
            return self.schedule
        seq = list(self.schedule)
        return seq[min(level_index, len(seq) - 1)]


@dataclass
class Level:
    """One level of the time-grid hierarchy.

    ``departures`` and ``sigma`` hold one entry per step, or a single shared
    entry when the wave speed is constant in space and time.  ``cf`` is the
    coarsening factor toward the next coarser level (None on the coarsest).
    """

    index: int
    grid: Grid1D | Grid2D
    p: int
    n_steps: int
    dt: float
    kind: str
    departures: list | None
    sigma: list | None = None
    gmres_cfg: GmresConfig | None = None
    cf: int | None = None
    finer: "Level | None" = None
    shared: bool = False
    _idx: np.ndarray | None = field(default=None, repr=False)
    _w: np.ndarray | None = field(default=None, repr=False)

    def dep(self, n: int):
        return self.departures[0] if self.shared else self.departures[n]

    def sig(self, n: int) -> CorrectionField:
        return self.sigma[0] if self.shared else self.sigma[n]

    # -- step application -------------------------------------------------

    def _ensure_stencils(self) -> None:
        if self._idx is not None or self.grid.dim != 1:
            return
        pairs = [sl_stencil_1d(self.grid, dep, self.p) for dep in self.departures]
        self._idx = np.stack([ix.astype(np.int32) for ix, _ in pairs])
        self._w = np.stack([w for _, w in pairs])

    def _sl_apply(self, n: int, u: np.ndarray) -> np.ndarray:
        if self.grid.dim == 1:
            self._ensure_stencils()
            k = 0 if self.shared else n
            return (u[self._idx[k]] * self._w[k]).sum(axis=1)
        return sl_step(self.grid, self.dep(n), self.p, u)

    def step(self, n: int, u: np.ndarray) -> np.ndarray:
        """Advance u across step n of this level (operator only, no forcing)."""
        if self.kind == "ideal":
            ratio = self.finer.n_steps // self.n_steps
            for k in range(ratio):
                u = self.finer.step(n * ratio + k, u)
            return u
        v = self._sl_apply(n, u)
        if self.kind == "corrected":
            stencil = derivative_stencil(self.p)
            sig = self.sig(n)
            v, _ = gmres_solve(lambda w: apply_ImSD(sig, stencil, w, self.grid),
                               v, self.gmres_cfg)
        elif self.kind == "forward_euler":
            v = apply_IpSD(self.sig(n), derivative_stencil(self.p), v, self.grid)
        return v

    def step_batch(self, t_idx: np.ndarray, U: np.ndarray) -> np.ndarray:
        """Apply the steps at ``t_idx`` to the matching rows of U at once.

        Vectorized for plain semi-Lagrangian 1D levels; otherwise a row loop.
        """
        if self.grid.dim == 1 and self.kind in ("fine", "rediscretized"):
            self._ensure_stencils()
            nq = self.grid.n_x * self._w.shape[2]
            if self.shared:
                gathered = U[:, self._idx[0].ravel()]
                w = self._w[0]
            else:
                gathered = np.take_along_axis(U, self._idx[t_idx].reshape(len(t_idx), nq), axis=1)
                w = self._w[t_idx]
            return (gathered.reshape(U.shape[0], self.grid.n_x, -1) * w).sum(axis=2)
        return np.stack([self.step(int(t), u) for t, u in zip(t_idx, U)])


@dataclass
class ConvergenceReport:
    """Residual history and termination status of one solve."""

    residual_norms: np.ndarray
    iterations: int
    status: str  # converged | diverged | max_iters
    final_factor: float
    wall_time: float = 0.0


# ---------------------------------------------------------------------------
# hierarchy construction


def _coarse_departures(cfg: SolverConfig, speed: WaveSpeed, finer: Level,
                       n_steps: int, dt: float, scheme, dt_fine: float) -> tuple[list, bool]:
    grid = finer.grid
    shared = speed.constant
    count = 1 if shared else n_steps
    deps = []
    m = finer.n_steps // n_steps
    for n in range(count):
        t0 = n * dt
        if cfg.departure_policy == "backtrack":
            children = [finer.dep(n * m + k) for k in range(m)]
            deps.append(backtracked_departures(grid, children, t0, dt))
        elif cfg.departure_policy == "erk_rediscretized":
            deps.append(erk_departures(grid, speed, t0, dt, scheme))
        else:  # erk_substeps: compose fine-resolution ERK steps
            n_sub = int(round(dt / dt_fine))
            if grid.dim == 1:
                coords = grid.nodes()
                for k in range(n_sub - 1, -1, -1):
                    coords = erk_trace_back(speed, coords, t0 + k * dt_fine, dt_fine, scheme)
                deps.append(DepartureSet1D.from_coords(grid, grid.nodes(), coords, t0, dt))
            else:
                from .semi_lagrangian import DepartureSet2D

                x, y = grid.nodes()
                cx, cy = x, y
                for k in range(n_sub - 1, -1, -1):
                    cx, cy = erk_trace_back(speed, (cx, cy), t0 + k * dt_fine, dt_fine, scheme)
                deps.append(DepartureSet2D.from_coords(grid, x, y, cx, cy, t0, dt))
    return deps, shared


def build_hierarchy(cfg: SolverConfig) -> list[Level]:
    """Build the level hierarchy: fine-level departure sets via ERK tracing,
    coarse-level departures per the configured policy, and accumulated
    correction coefficient fields for corrected operators."""
    speed = get_wave_speed(cfg.wave_speed) if isinstance(cfg.wave_speed, str) else cfg.wave_speed
    if speed.dim != cfg.dim:
        raise ValueError(f"wave speed {speed.name} is {speed.dim}D but config is {cfg.dim}D")
    grid = Grid1D(cfg.n_x) if cfg.dim == 1 else Grid2D(cfg.n_x)
    dt = cfg.dt if cfg.dt is not None else DEFAULT_CFL * grid.h
    scheme = erk_scheme(cfg.erk_order)

    shared = speed.constant
    count = 1 if shared else cfg.n_t
    fine_deps = [erk_departures(grid, speed, n * dt, dt, scheme) for n in range(count)]
    fine = Level(0, grid, cfg.p, cfg.n_t, dt, "fine", fine_deps, shared=shared)
    levels = [fine]

    while True:
        if cfg.max_levels is not None and len(levels) >= cfg.max_levels:
            break
        prev = levels[-1]
        m = cfg.schedule_factor(len(levels) - 1)
        if prev.n_steps % m != 0 or prev.n_steps // m < 2:
            break
        n_c = prev.n_steps // m
        dt_c = prev.dt * m
        kind = cfg.operator_kind
        if kind == "ideal":
            lvl = Level(len(levels), grid, cfg.p, n_c, dt_c, "ideal", None, finer=prev)
        else:
            deps, dshared = _coarse_departures(cfg, speed, prev, n_c, dt_c, scheme, dt)
            sigma = None
            if kind in ("corrected", "forward_euler"):
                sigma = []
                for n in range(1 if dshared else n_c):
                    children = [prev.dep(n * m + k) for k in range(m)]
                    phi = phi_field(cfg.p, deps[n], children)
                    if prev.sigma is not None:
                        phi = sigma_accumulate([prev.sig(n * m + k) for k in range(m)], phi)
                    sigma.append(phi)
            lvl = Level(len(levels), grid, cfg.p, n_c, dt_c, kind, deps, sigma,
                        finer=prev, shared=dshared)
        prev.cf = m
        levels.append(lvl)

    if len(levels) < 2:
        raise ValueError("time grid does not admit any coarsening with the given schedule")

    mode = cfg.gmres_mode or ("fixed" if len(levels) == 2 else "tolerance")
    gmres_cfg = GmresConfig(10, None) if mode == "fixed" else GmresConfig(10, 1e-2)
    for lvl in levels[1:]:
        lvl.gmres_cfg = gmres_cfg
    return levels


# ---------------------------------------------------------------------------
# relaxation, residual, cycling


def f_relax(level: Level, U: np.ndarray, G: np.ndarray, m: int | None = None) -> None:
    """Zero residuals at F-points by stepping from each C-point across the
    m - 1 F-points after it (in place; batched across C-intervals)."""
    m = level.cf if m is None else m
    starts = np.arange(0, level.n_steps, m)
    for k in range(1, m):
        t_idx = starts + k - 1
        U[t_idx + 1] = level.step_batch(t_idx, U[t_idx]) + G[t_idx + 1]


def c_relax(level: Level, U: np.ndarray, G: np.ndarray, m: int | None = None) -> None:
    """Zero residuals at C-points by stepping from the preceding F-point."""
    m = level.cf if m is None else m
    t_idx = np.arange(m, level.n_steps + 1, m) - 1
    U[t_idx + 1] = level.step_batch(t_idx, U[t_idx]) + G[t_idx + 1]


def residual(level: Level, U: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Space-time residual r_n = g_n + Phi u_{n-1} - u_n (r_0 = 0)."""
    R = np.empty_like(U)
    R[0] = 0.0
    t_idx = np.arange(level.n_steps)
    R[1:] = G[1:] + level.step_batch(t_idx, U[:-1]) - U[1:]
    return R


def solve_sequential(level: Level, U: np.ndarray, G: np.ndarray) -> None:
    """Exact solve of a level's one-step system by sequential time stepping."""
    if (_kernels is not None and level.grid.dim == 1 and level.kind == "corrected"
            and level.n_steps >= 64):
        level._ensure_stencils()
        sig = np.stack([s.x for s in level.sigma])
        tol = -1.0 if level.gmres_cfg.tol is None else level.gmres_cfg.tol
        _kernels.sequential_corrected_sweep(
            level._idx, level._w, sig, derivative_stencil(level.p), U, G,
            level.gmres_cfg.max_iters, tol, level.shared)
        return
    for n in range(1, level.n_steps + 1):
        U[n] = level.step(n - 1, U[n - 1]) + G[n]


def v_cycle(levels: list[Level], li: int, U: np.ndarray, G: np.ndarray,
            relaxation: str = "FCF") -> None:
    """One recursive V-cycle starting at level ``li`` (in place)."""
    lev = levels[li]
    if li == len(levels) - 1:
        solve_sequential(lev, U, G)
        return
    m = lev.cf
    f_relax(lev, U, G)
    if relaxation == "FCF":
        c_relax(lev, U, G)
        f_relax(lev, U, G)
    R = residual(lev, U, G)
    Gc = R[::m].copy()
    Uc = np.zeros((lev.n_steps // m + 1, lev.grid.n_points))
    v_cycle(levels, li + 1, Uc, Gc, relaxation)
    U[::m] += Uc
    f_relax(lev, U, G)


def solve(cfg: SolverConfig, levels: list[Level] | None = None) -> tuple[ConvergenceReport, np.ndarray]:
    """Run MGRIT to the configured residual reduction.

    Unknowns u_1..u_nt start uniformly random in [0, 1) (seeded); iteration
    stops when the space-time residual two-norm drops by ``rtol`` relative to
    its initial value, grows by ``divergence_factor``, or hits ``max_iters``.
    Returns (report, space-time state of shape (n_t + 1, n_dof)).
    """
    t_begin = time.perf_counter()
    if levels is None:
        levels = build_hierarchy(cfg)
    fine = levels[0]
    grid = fine.grid
    rng = np.random.default_rng(cfg.seed)
    U = np.empty((cfg.n_t + 1, grid.n_points))
    U[0] = initial_condition(grid)
    U[1:] = rng.random((cfg.n_t, grid.n_points))
    G = np.zeros_like(U)

    r0 = space_time_norm(residual(fine, U, G))
    history = [r0]
    status = "max_iters"
    for _ in range(cfg.max_iters):
        try:
            v_cycle(levels, 0, U, G, cfg.relaxation)
            r = space_time_norm(residual(fine, U, G))
        except (ValueError, FloatingPointError):
            history.append(float("nan"))
            status = "diverged"
            break
        history.append(r)
        if not np.isfinite(r) or r >= cfg.divergence_factor * r0:
            status = "diverged"
            break
        if r <= cfg.rtol * r0:
            status = "converged"
            break
    hist = np.array(history)
    factor = float(hist[-1] / hist[-2]) if len(hist) > 1 else float("nan")
    report = ConvergenceReport(hist, len(hist) - 1, status, factor,
                               time.perf_counter() - t_begin)
    return report, U


def sequential_reference(cfg: SolverConfig, levels: list[Level] | None = None) -> np.ndarray:
    """Plain sequential time stepping of the fine-level problem."""
    if levels is None:
        levels = build_hierarchy(replace(cfg, max_levels=2))
    fine = levels[0]
    U = np.empty((cfg.n_t + 1, fine.grid.n_points))
    U[0] = initial_condition(fine.grid)
    G = np.zeros_like(U)
    solve_sequential(fine, U, G)
    return U
