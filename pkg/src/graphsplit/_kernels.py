"""Compiled inner loops for subspace problems.

When every node operator is a subspace normal cone, one iteration of
either splitting algorithm is a forward sweep of small dense products.
Run lengths reach 1e5 iterations, so the sweep is the hot path; it is
written once below and compiled with numba unless the environment variable
GRAPH_SPLIT_NO_NUMBA is set (or numba is unavailable), in which case the
same source runs as plain numpy.  ``benchmarks/bench_kernels.py`` compares
the two paths.

Graph structure is passed in CSR-like form: ``pred_indptr``/``pred_idx``
list, for each node i, the nodes h with an edge (h, i) in G (always h < i,
so the sweep can consume current-iteration values), and ``nbr_indptr``/
``nbr_idx`` list all G'-neighbors of i.

Status codes: 0 = stop-rule hit, 1 = iteration budget exhausted,
2 = non-finite residual.
"""

from __future__ import annotations

import os

import numpy as np

STATUS_CONVERGED = 0
STATUS_MAX_ITERS = 1
STATUS_DIVERGED = 2


def _alg2_sweep(Z, Zt, proj, pred_indptr, pred_idx, dinv, v0, thetas, tol):
    n = proj.shape[0]
    d = v0.shape[1]
    max_iters = thetas.shape[0]
    v = v0.copy()
    x = np.zeros((n, d))
    residuals = np.empty(max_iters)
    status = STATUS_MAX_ITERS
    k_end = max_iters
    for k in range(max_iters):
        for i in range(n):
            t = dinv[i] * np.dot(Z[i], v)
            for p in range(pred_indptr[i], pred_indptr[i + 1]):
                t = t + (2.0 * dinv[i]) * x[pred_idx[p]]
            x[i] = np.dot(proj[i], t)
        g = np.dot(Zt, x)
        res = np.sqrt(np.sum(g * g))
        residuals[k] = res
        if not np.isfinite(res):
            status = STATUS_DIVERGED
            k_end = k + 1
            break
        vn = np.sqrt(np.sum(v * v))
        scale = vn if vn > 1.0 else 1.0
        v = v - thetas[k] * g
        if res <= tol * scale:
            status = STATUS_CONVERGED
            k_end = k + 1
            break
    return x, v, residuals[:k_end], status


def _alg1_sweep(Z, Zt, proj, pred_indptr, pred_idx, nbr_indptr, nbr_idx,
                dsub, dinv, w0, v0, thetas, tol):
    n = proj.shape[0]
    d = v0.shape[1]
    max_iters = thetas.shape[0]
    w = w0.copy()
    v = v0.copy()
    x = np.zeros((n, d))
    residuals = np.empty(max_iters)
    status = STATUS_MAX_ITERS
    k_end = max_iters
    for k in range(max_iters):
        for i in range(n):
            t = dsub[i] * w[i] + np.dot(Z[i], v)
            for p in range(nbr_indptr[i], nbr_indptr[i + 1]):
                t = t - w[nbr_idx[p]]
            for p in range(pred_indptr[i], pred_indptr[i + 1]):
                t = t + 2.0 * x[pred_idx[p]]
            x[i] = np.dot(proj[i], dinv[i] * t)
        g = np.dot(Zt, w - 2.0 * x)
        res = np.sqrt(np.sum(g * g))
        residuals[k] = res
        if not np.isfinite(res):
            status = STATUS_DIVERGED
            k_end = k + 1
            break
        vn = np.sqrt(np.sum(v * v))
        scale = vn if vn > 1.0 else 1.0
        theta = thetas[k]
        v = v + theta * g
        w = (1.0 - theta) * w + theta * x
        if res <= tol * scale:
            status = STATUS_CONVERGED
            k_end = k + 1
            break
    return x, w, v, residuals[:k_end], status


def _want_numba() -> bool:
    return os.environ.get("GRAPH_SPLIT_NO_NUMBA", "") == ""


USING_NUMBA = False
if _want_numba():
    try:
        from numba import njit
    except ImportError:
        pass
    else:
        alg2_sweep = njit(cache=True)(_alg2_sweep)
        alg1_sweep = njit(cache=True)(_alg1_sweep)
        USING_NUMBA = True

if not USING_NUMBA:
    alg2_sweep = _alg2_sweep
    alg1_sweep = _alg1_sweep
