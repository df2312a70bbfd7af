"""Truncation-error correction machinery for coarse semi-Lagrangian operators.

The leading interpolation error of a semi-Lagrangian step is governed by a
degree p+1 polynomial of the departure offsets and a high-order derivative.
Comparing the coarse step against the product of the fine steps it replaces
yields a per-node coefficient vector; appending the implicit factor
(I - diag(coeff) * D)^{-1} to the coarse step cancels the leading-order gap.
The implicit solve uses a short, non-restarted GMRES iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .semi_lagrangian import SUPPORTED_DEGREES, stencil_extents


def f_eval(p: int, z) -> np.ndarray:
    """Evaluate the degree p+1 interpolation-error polynomial
    prod_{q=-l(p)}^{r(p)} (q + z) / (p+1)!."""
    if p not in SUPPORTED_DEGREES:
        raise ValueError(f"unsupported interpolation degree p={p}")
    ell, r = stencil_extents(p)
    z = np.asarray(z, dtype=float)
    out = np.ones_like(z)
    for q in range(-ell, r + 1):
        out = out * (q + z)
    return out / math.factorial(p + 1)


def derivative_stencil(p: int) -> np.ndarray:
    """Minimal-width centered second-order stencil for the (p+1)st derivative.

    Integer coefficients over offsets -(p+1)/2 .. (p+1)/2; the scaled action
    coeff/h^(p+1) approximates d^(p+1)/dx^(p+1) on periodic grid functions.
    """
    if p == 1:
        return np.array([1.0, -2.0, 1.0])
    if p == 3:
        return np.array([1.0, -4.0, 6.0, -4.0, 1.0])
    if p == 5:
        return np.array([1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0])
    raise ValueError(f"unsupported interpolation degree p={p}")


def apply_stencil_periodic(coeffs: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Circulant application of a centered stencil: out_i = sum_k c_k v_{i+k-rad}."""
    rad = (len(coeffs) - 1) // 2
    out = coeffs[rad] * v
    for k in range(1, rad + 1):
        out += coeffs[rad + k] * np.roll(v, -k) + coeffs[rad - k] * np.roll(v, k)
    return out


def stencil_symbol(coeffs: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Fourier symbol sum_k c_k e^{i k omega} of the centered stencil (real)."""
    rad = (len(coeffs) - 1) // 2
    omega = np.asarray(omega, dtype=float)
    out = np.full_like(omega, coeffs[rad])
    for k in range(1, rad + 1):
        out += (coeffs[rad + k] + coeffs[rad - k]) * np.cos(k * omega)
    return out


@dataclass
class CorrectionField:
    """Per-node correction coefficients of one coarse step.

    1D carries the x vector only; 2D adds the y vector built from the
    vertical offsets.
    """

    x: np.ndarray
    y: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return 1 if self.y is None else 2

    def __add__(self, other: "CorrectionField") -> "CorrectionField":
        if self.dim != other.dim:
            raise ValueError("cannot add correction fields of different dimensions")
        if self.y is None:
            return CorrectionField(self.x + other.x)
        return CorrectionField(self.x + other.x, self.y + other.y)


def phi_vector(p: int, coarse_eps: np.ndarray, fine_eps: Sequence[np.ndarray]) -> np.ndarray:
    """Coefficient vector of the leading truncation-error gap between the
    coarse step and the product of its fine substeps:

        (-1)^(p+1) * (f(coarse_eps) - sum_k f(fine_eps_k)).
    """
    if len(fine_eps) < 1:
        raise ValueError("at least one fine substep is required")
    sign = (-1.0) ** (p + 1)
    acc = f_eval(p, coarse_eps).copy()
    for eps in fine_eps:
        acc -= f_eval(p, eps)
    return sign * acc


def phi_field(p: int, coarse_dep, fine_deps: Sequence) -> CorrectionField:
    """Correction field of one coarse step from its own departure set and the
    child-level sets it spans (x and y directions separately in 2D)."""
    if hasattr(coarse_dep, "nu"):
        return CorrectionField(
            phi_vector(p, coarse_dep.eps, [d.eps for d in fine_deps]),
            phi_vector(p, coarse_dep.nu, [d.nu for d in fine_deps]),
        )
    return CorrectionField(phi_vector(p, coarse_dep.eps, [d.eps for d in fine_deps]))


def sigma_accumulate(child_sigmas: Sequence[CorrectionField], phi_this_level: CorrectionField) -> CorrectionField:
    """Multilevel coefficient recursion: sum of the child-step coefficients
    plus this level's own gap coefficient.

    Pass an empty child list on the first coarse level, where sigma = phi.
    """
    acc = phi_this_level
    for child in child_sigmas:
        acc = acc + child
    return acc


def apply_ImSD(field: CorrectionField, stencil: np.ndarray, v: np.ndarray, grid=None) -> np.ndarray:
    """Apply the un-inverted correction matrix I - diag(field) * D.

    2D applies the stencil along x and y independently with the respective
    coefficient vectors; ``grid`` is required there to recover the row-major
    layout.
    """
    if field.x.shape != v.shape:
        raise ValueError("correction field and state shapes differ")
    if field.dim == 1:
        return v - field.x * apply_stencil_periodic(stencil, v)
    n = grid.n_x
    v2 = v.reshape(n, n)
    rad = (len(stencil) - 1) // 2
    dx = stencil[rad] * v2
    dy = stencil[rad] * v2
    for k in range(1, rad + 1):
        dx = dx + stencil[rad + k] * np.roll(v2, -k, axis=1) + stencil[rad - k] * np.roll(v2, k, axis=1)
        dy = dy + stencil[rad + k] * np.roll(v2, -k, axis=0) + stencil[rad - k] * np.roll(v2, k, axis=0)
    return v - field.x * dx.ravel() - field.y * dy.ravel()


def apply_IpSD(field: CorrectionField, stencil: np.ndarray, v: np.ndarray, grid=None) -> np.ndarray:
    """Explicit (forward Euler) correction factor I + diag(field) * D."""
    return 2.0 * v - apply_ImSD(field, stencil, v, grid)


@dataclass(frozen=True)
class GmresConfig:
    """GMRES controls for the implicit correction solves.

    ``tol`` is a relative-residual stopping tolerance; None runs exactly
    ``max_iters`` iterations as in the two-level experiments.
    """

    max_iters: int = 10
    tol: float | None = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


def gmres_solve(apply_op: Callable[[np.ndarray], np.ndarray], rhs: np.ndarray,
                cfg: GmresConfig) -> tuple[np.ndarray, np.ndarray]:
    """Non-restarted GMRES with modified Gram-Schmidt and a zero initial guess.

    Returns (approximate solution, residual-norm history).  On Krylov
    breakdown the current iterate is returned; its residual is already exact
    to rounding in that case.
    """
    if not np.all(np.isfinite(rhs)):
        raise ValueError("non-finite right-hand side in gmres_solve")
    beta = np.linalg.norm(rhs)
    if beta == 0.0:
        return np.zeros_like(rhs), np.array([0.0])
    max_iters = cfg.max_iters
    n = rhs.shape[0]
    basis = np.empty((max_iters + 1, n))
    hess = np.zeros((max_iters + 1, max_iters))
    cs = np.zeros(max_iters)
    sn = np.zeros(max_iters)
    g = np.zeros(max_iters + 1)
    g[0] = beta
    basis[0] = rhs / beta
    res_hist = [beta]
    k_done = 0
    for k in range(max_iters):
        # copy so orthogonalization never mutates an operator that aliases
        # its input (e.g. the identity)
        w = np.array(apply_op(basis[k]), dtype=float)
        for j in range(k + 1):
            hess[j, k] = np.dot(basis[j], w)
            w -= hess[j, k] * basis[j]
        hess[k + 1, k] = np.linalg.norm(w)
        breakdown = hess[k + 1, k] <= 1e-14 * beta
        if not breakdown:
            basis[k + 1] = w / hess[k + 1, k]
        # accumulated Givens rotations keep the least-squares problem triangular
        for j in range(k):
            tmp = cs[j] * hess[j, k] + sn[j] * hess[j + 1, k]
            hess[j + 1, k] = -sn[j] * hess[j, k] + cs[j] * hess[j + 1, k]
            hess[j, k] = tmp
        denom = np.hypot(hess[k, k], hess[k + 1, k])
        cs[k] = hess[k, k] / denom
        sn[k] = hess[k + 1, k] / denom
        hess[k, k] = denom
        hess[k + 1, k] = 0.0
        g[k + 1] = -sn[k] * g[k]
        g[k] = cs[k] * g[k]
        res_hist.append(abs(g[k + 1]))
        k_done = k + 1
        if breakdown:
            break
        if cfg.tol is not None and res_hist[-1] <= cfg.tol * beta:
            break
    y = np.linalg.solve(np.triu(hess[:k_done, :k_done]), g[:k_done])
    x = basis[:k_done].T @ y
    return x, np.array(res_hist)


def corrected_coarse_step(grid, departures, p: int, field: CorrectionField,
                          cfg: GmresConfig, u: np.ndarray) -> np.ndarray:
    """Backward-Euler corrected coarse step: semi-Lagrangian step followed by
    an approximate solve of (I - diag(field) D) x = S u."""
    from .semi_lagrangian import sl_step

    stencil = derivative_stencil(p)
    rhs = sl_step(grid, departures, p, u)
    x, _ = gmres_solve(lambda v: apply_ImSD(field, stencil, v, grid), rhs, cfg)
    return x


def forward_euler_coarse_step(grid, departures, p: int, field: CorrectionField,
                              u: np.ndarray) -> np.ndarray:
    """Explicit variant: coarse step followed by I + diag(field) D.

    Unstable for larger coarsening factors; retained as a demonstration
    baseline only.
    """
    from .semi_lagrangian import sl_step

    stencil = derivative_stencil(p)
    v = sl_step(grid, departures, p, u)
    return apply_IpSD(field, stencil, v, grid)
