"""Semidiscrete Fourier analysis for constant wave speed.

All operators involved are circulant for constant wave speed, so their action
on the Fourier mode e^{i omega j} is a scalar symbol.  The two-level
convergence-factor estimate combines the fine and coarse symbols over a
frequency sweep.
"""

from __future__ import annotations

import numpy as np

from .coarse_correction import derivative_stencil, f_eval, stencil_symbol
from .semi_lagrangian import interp_weights

N_OMEGA_DEFAULT = 512
_ZERO_SKIP = 1e-13

COARSE_KINDS = ("rediscretized", "corrected")


def sl_symbol(p: int, shift: float, omega: np.ndarray) -> np.ndarray:
    """Symbol of the semi-Lagrangian step with displacement ``shift`` grid
    units: e^{-i k0 omega} * sum_j w_j(eps) e^{i j omega} with shift = k0 + eps.
    """
    omega = np.asarray(omega, dtype=float)
    k0 = np.floor(shift)
    eps = shift - k0
    w = interp_weights(p, np.array([eps]))[0]
    ell = (p + 1) // 2
    acc = np.zeros_like(omega, dtype=complex)
    for col, j in enumerate(range(-ell, ell)):
        acc += w[col] * np.exp(1j * j * omega)
    return np.exp(-1j * k0 * omega) * acc


def phi_scalar(p: int, m: int, c: float) -> float:
    """Constant-wave-speed correction coefficient for coarsening factor m at
    fine CFL number c (all nodes share one value)."""
    sign = (-1.0) ** (p + 1)
    eps_coarse = m * c - np.floor(m * c)
    eps_fine = c - np.floor(c)
    return float(sign * (f_eval(p, eps_coarse) - m * f_eval(p, eps_fine)))


def corrected_symbol(p: int, m: int, c: float, omega: np.ndarray) -> np.ndarray:
    """Symbol of the backward-Euler corrected coarse step, with the implicit
    factor inverted exactly."""
    d = stencil_symbol(derivative_stencil(p), omega)
    phi = phi_scalar(p, m, c)
    return sl_symbol(p, m * c, omega) / (1.0 - phi * d)


def forward_euler_symbol(p: int, m: int, c: float, omega: np.ndarray) -> np.ndarray:
    """Symbol of the explicit corrected coarse step (I + phi D) S."""
    d = stencil_symbol(derivative_stencil(p), omega)
    phi = phi_scalar(p, m, c)
    return sl_symbol(p, m * c, omega) * (1.0 + phi * d)


def coarse_symbol(p: int, m: int, c: float, omega: np.ndarray, kind: str) -> np.ndarray:
    if kind == "rediscretized":
        return sl_symbol(p, m * c, omega)
    if kind == "corrected":
        return corrected_symbol(p, m, c, omega)
    raise ValueError(f"unknown coarse kind {kind!r}; expected one of {COARSE_KINDS}")


def rho_estimate(p: int, m: int, c: float, coarse_kind: str,
                 n_omega: int = N_OMEGA_DEFAULT) -> float:
    """Two-level convergence-factor estimate

        max_omega |lambda|^m |lambda^m - mu| / (1 - |mu|)

    over ``n_omega`` equispaced frequencies in [-pi, pi).  Frequencies where
    |1 - |mu|| falls below 1e-13 are skipped (removable 0/0 at omega = 0).
    """
    omega = -np.pi + 2.0 * np.pi * np.arange(n_omega) / n_omega
    lam = sl_symbol(p, c, omega)
    mu = coarse_symbol(p, m, c, omega, coarse_kind)
    denom = 1.0 - np.abs(mu)
    keep = np.abs(denom) >= _ZERO_SKIP
    if not np.any(keep):
        return 0.0
    lam_m = lam[keep] ** m
    vals = np.abs(lam[keep]) ** m * np.abs(lam_m - mu[keep]) / denom[keep]
    return float(np.max(vals))
