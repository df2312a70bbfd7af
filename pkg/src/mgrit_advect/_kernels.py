"""Numba-compiled hot path for sequential time stepping with the corrected
1D coarse operator.

The coarsest-level solve of a two-level run applies thousands of small GMRES
solves back to back; doing that through numpy carries too much per-call
overhead.  The kernel reimplements exactly the same algorithm as
coarse_correction.gmres_solve (modified Gram-Schmidt, Givens rotations, zero
initial guess, fixed iterations or relative tolerance) on the stencil
operator I - diag(sigma) D.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _apply_imsd(sig, stencil, v, out):
    n = v.shape[0]
    rad = (stencil.shape[0] - 1) // 2
    for i in range(n):
        acc = 0.0
        for k in range(-rad, rad + 1):
            j = i + k
            if j < 0:
                j += n
            elif j >= n:
                j -= n
            acc += stencil[rad + k] * v[j]
        out[i] = v[i] - sig[i] * acc


@njit(cache=True)
def _gmres_imsd(sig, stencil, rhs, max_iters, tol, x):
    """GMRES on (I - diag(sig) D) x = rhs; tol < 0 means run all iterations."""
    n = rhs.shape[0]
    beta = 0.0
    for i in range(n):
        beta += rhs[i] * rhs[i]
    beta = np.sqrt(beta)
    if beta == 0.0:
        for i in range(n):
            x[i] = 0.0
        return
    basis = np.empty((max_iters + 1, n))
    hess = np.zeros((max_iters + 1, max_iters))
    cs = np.zeros(max_iters)
    sn = np.zeros(max_iters)
    g = np.zeros(max_iters + 1)
    g[0] = beta
    for i in range(n):
        basis[0, i] = rhs[i] / beta
    w = np.empty(n)
    k_done = 0
    for k in range(max_iters):
        _apply_imsd(sig, stencil, basis[k], w)
        for j in range(k + 1):
            hjk = 0.0
            for i in range(n):
                hjk += basis[j, i] * w[i]
            hess[j, k] = hjk
            for i in range(n):
                w[i] -= hjk * basis[j, i]
        nrm = 0.0
        for i in range(n):
            nrm += w[i] * w[i]
        nrm = np.sqrt(nrm)
        hess[k + 1, k] = nrm
        breakdown = nrm <= 1e-14 * beta
        if not breakdown:
            for i in range(n):
                basis[k + 1, i] = w[i] / nrm
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
        k_done = k + 1
        if breakdown:
            break
        if tol >= 0.0 and abs(g[k + 1]) <= tol * beta:
            break
    # back substitution on the triangular least-squares system
    y = np.empty(k_done)
    for j in range(k_done - 1, -1, -1):
        acc = g[j]
        for jj in range(j + 1, k_done):
            acc -= hess[j, jj] * y[jj]
        y[j] = acc / hess[j, j]
    for i in range(n):
        acc = 0.0
        for j in range(k_done):
            acc += basis[j, i] * y[j]
        x[i] = acc


@njit(cache=True)
def sequential_corrected_sweep(idx, w, sig, stencil, U, G, max_iters, tol, shared):
    """In-place sequential solve U[n] = B S U[n-1] + G[n] for all steps.

    idx/w are the stacked semi-Lagrangian gather stencils, sig the stacked
    correction coefficient vectors (first axis length 1 when shared).
    """
    n_steps = U.shape[0] - 1
    n = U.shape[1]
    q = w.shape[2]
    rhs = np.empty(n)
    for step in range(n_steps):
        k = 0 if shared else step
        ok = True
        for i in range(n):
            acc = 0.0
            for j in range(q):
                acc += w[k, i, j] * U[step, idx[k, i, j]]
            rhs[i] = acc
            if not np.isfinite(acc):
                ok = False
        if not ok:
            for i in range(n):
                U[step + 1, i] = np.nan
            continue
        _gmres_imsd(sig[k], stencil, rhs, max_iters, tol, U[step + 1])
        for i in range(n):
            U[step + 1, i] += G[step + 1, i]
