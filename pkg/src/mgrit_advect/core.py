"""Periodic grids, wave-speed catalog, norms, and seeded state initialization.

The spatial domain is Omega = (-1, 1) in 1D and (-1, 1)^2 in 2D, discretized
with n_x equispaced nodes per direction and periodic identification (no
duplicated endpoint node).  All state vectors are flat numpy arrays of length
n_x (1D) or n_x^2 (2D, row-major with x fastest).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class Grid1D:
    """Periodic 1D grid of ``n_x`` equispaced nodes on [x_lo, x_lo + length)."""

    n_x: int
    x_lo: float = -1.0
    length: float = 2.0

    def __post_init__(self):
        if self.n_x < 1:
            raise ValueError("n_x must be positive")
        if self.length <= 0:
            raise ValueError("domain length must be positive")

    @property
    def h(self) -> float:
        return self.length / self.n_x

    @property
    def n_points(self) -> int:
        return self.n_x

    @property
    def dim(self) -> int:
        return 1

    def nodes(self) -> np.ndarray:
        return self.x_lo + self.h * np.arange(self.n_x)

    def wrap(self, coords: np.ndarray) -> np.ndarray:
        """Map coordinates into the fundamental period [x_lo, x_lo + length)."""
        return self.x_lo + np.mod(coords - self.x_lo, self.length)


@dataclass(frozen=True)
class Grid2D:
    """Tensor product of two identical periodic 1D grids.

    Flat indexing is row-major with x fastest: flat = j * n_x + i for node
    (x_i, y_j).
    """

    n_x: int
    x_lo: float = -1.0
    length: float = 2.0

    @property
    def axis(self) -> Grid1D:
        return Grid1D(self.n_x, self.x_lo, self.length)

    @property
    def h(self) -> float:
        return self.length / self.n_x

    @property
    def n_points(self) -> int:
        return self.n_x * self.n_x

    @property
    def dim(self) -> int:
        return 2

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Flat (X, Y) coordinate arrays of all n_x^2 nodes."""
        x1 = self.axis.nodes()
        return np.tile(x1, self.n_x), np.repeat(x1, self.n_x)


@dataclass(frozen=True)
class TimeGrid:
    """Equispaced time grid with n_t steps of size dt starting at t = 0."""

    n_t: int
    dt: float

    def __post_init__(self):
        if self.n_t < 1:
            raise ValueError("n_t must be at least 1")
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @property
    def t_final(self) -> float:
        return self.n_t * self.dt

    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n_t + 1)


@dataclass(frozen=True)
class WaveSpeed:
    """A wave-speed field: one component in 1D, two components in 2D.

    ``components`` holds vectorized evaluators ``alpha(x, t)`` in 1D or
    ``alpha(x, y, t), beta(x, y, t)`` in 2D.  ``constant`` marks fields that
    are independent of both space and time, which lets solvers share
    departure-point data across time steps.
    """

    name: str
    dim: int
    components: tuple[Callable, ...] = field(compare=False)
    constant: bool = False

    def alpha(self, *args):
        return self.components[0](*args)

    def beta(self, *args):
        if self.dim != 2:
            raise ValueError("beta is only defined for 2D wave speeds")
        return self.components[1](*args)


def _catalog() -> dict[str, WaveSpeed]:
    two_pi = 2.0 * np.pi
    return {
        "C1": WaveSpeed("C1", 1, (lambda x, t: np.ones_like(np.asarray(x, dtype=float)),), constant=True),
        "C2": WaveSpeed("C2", 1, (lambda x, t: np.cos(two_pi * t) * np.ones_like(np.asarray(x, dtype=float)),)),
        "C3": WaveSpeed("C3", 1, (lambda x, t: np.cos(two_pi * t) * np.cos(two_pi * x),)),
        "C4": WaveSpeed(
            "C4",
            2,
            (
                lambda x, y, t: np.ones_like(np.asarray(x, dtype=float)),
                lambda x, y, t: np.ones_like(np.asarray(y, dtype=float)),
            ),
            constant=True,
        ),
        "C5": WaveSpeed(
            "C5",
            2,
            (
                lambda x, y, t: np.sin(np.pi * y) ** 2 * np.cos(two_pi * t / 3.4),
                lambda x, y, t: -np.cos(np.pi * x) ** 2 * np.cos(two_pi * t / 3.4),
            ),
        ),
    }


def get_wave_speed(name: str) -> WaveSpeed:
    """Look up a catalog wave speed by identifier (C1..C5)."""
    try:
        return _catalog()[name]
    except KeyError:
        raise ValueError(f"unknown wave speed {name!r}; catalog: C1, C2, C3, C4, C5") from None


def initial_condition(grid) -> np.ndarray:
    """Smooth periodic initial state: sin^4(pi x) in 1D, a product of
    squared sines in 2D."""
    if grid.dim == 1:
        return np.sin(np.pi * grid.nodes()) ** 4
    x, y = grid.nodes()
    return np.sin(0.5 * np.pi * (x - 1.0)) ** 2 * np.sin(0.5 * np.pi * (y - 1.0)) ** 2


def space_time_norm(states: Sequence[np.ndarray] | np.ndarray) -> float:
    """l2 norm over all entries of all states (flat two-norm)."""
    if isinstance(states, np.ndarray):
        if states.size == 0:
            raise ValueError("space_time_norm of empty state sequence")
        return float(np.linalg.norm(states.ravel()))
    if len(states) == 0:
        raise ValueError("space_time_norm of empty state sequence")
    return float(np.sqrt(sum(float(np.dot(s.ravel(), s.ravel())) for s in states)))


def random_state(grid, seed: int) -> np.ndarray:
    """Uniform [0, 1) state, deterministic in the seed (PCG64 generator)."""
    rng = np.random.default_rng(seed)
    return rng.random(grid.n_points)
