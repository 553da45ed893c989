"""Splitting-problem container, operator applications and the two
fixed-point iterations.

Block vectors live in (R^d)^n or (R^d)^{n-1} and are stored as plain
numpy arrays of shape (n, d) / (n-1, d), so applying a coefficient matrix
K across blocks is the product ``K @ blocks``.

The preconditioner M = [[Lap(G'), Z], [Z^T, I]] and the block operator it
preconditions are never materialized: every application reduces to the
per-node forward sweep of ``solve_m_plus_a`` (well defined because every
edge (h, i) has h < i) plus small matrix-block products.

Iterations follow the two relaxed schemes

    w <- (1 - theta) w + theta x,   v <- v + theta Z^T (w - 2 x)     (expanded)
    v <- v - theta Z^T x                                             (reduced)

where x is the sweep output at the pre-update state.  The recorded
residual is the norm of the unrelaxed v-change (equal to ||dv|| / theta
for theta > 0), so it is invariant under relaxation scaling and is still
meaningful at theta = 0.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .factor import OntoDecomposition
from .graphs import GraphPair, degrees, laplacian
from .operators import NormalConeOp, ResolventOp, resolvent

log = logging.getLogger("graphsplit")

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITERS = 100_000


class DivergenceError(RuntimeError):
    """A non-finite value appeared during the iteration."""

    def __init__(self, iteration: int):
        super().__init__(f"non-finite iterate at iteration {iteration}")
        self.iteration = iteration


class SplittingProblem:
    """Graph pair + Laplacian decomposition + one resolvent per node.

    Parameters
    ----------
    pair : GraphPair
        The graphs (G, G') driving the sweep and the governing update.
    dec : OntoDecomposition
        Onto decomposition of Lap(G').
    ops : sequence of ResolventOp
        One operator per node, consumed through its resolvent only.
    d : int
        Ambient dimension of each block.
    """

    def __init__(self, pair: GraphPair, dec: OntoDecomposition, ops, d: int):
        n = pair.g.n
        ops = list(ops)
        if len(ops) != n:
            raise ValueError(f"expected {n} operators, got {len(ops)}")
        lap_sub = laplacian(pair.sub)
        mismatch = np.abs(dec.z @ dec.z.T - lap_sub).max()
        if mismatch > 1e-10:
            raise ValueError(
                f"decomposition does not factor Lap(G'): max deviation "
                f"{mismatch:.3e}"
            )
        self.pair = pair
        self.dec = dec
        self.ops = ops
        self.d = d
        self.n = n

        _, _, d_g = degrees(pair.g)
        _, _, d_sub = degrees(pair.sub)
        self.deg = d_g.astype(np.float64)
        self.deg_sub = d_sub.astype(np.float64)
        self._dinv = 1.0 / self.deg
        # in-neighbors in G (h with (h, i) in E) and all G'-neighbors, 0-based
        self.pred = [[] for _ in range(n)]
        for i, j in pair.g.edges:
            self.pred[j - 1].append(i - 1)
        self.nbr_sub = [[] for _ in range(n)]
        for i, j in pair.sub.edges:
            self.nbr_sub[i - 1].append(j - 1)
            self.nbr_sub[j - 1].append(i - 1)
        self.z = np.ascontiguousarray(dec.z)
        self.zt = np.ascontiguousarray(dec.z.T)

    @property
    def all_subspace(self) -> bool:
        return all(isinstance(op, NormalConeOp) for op in self.ops)

    def _kernel_inputs(self):
        proj = np.stack([op.subspace.projector() for op in self.ops])
        pred_indptr, pred_idx = _csr(self.pred)
        nbr_indptr, nbr_idx = _csr(self.nbr_sub)
        return proj, pred_indptr, pred_idx, nbr_indptr, nbr_idx


def _csr(lists) -> tuple[np.ndarray, np.ndarray]:
    indptr = np.zeros(len(lists) + 1, dtype=np.int64)
    for i, lst in enumerate(lists):
        indptr[i + 1] = indptr[i] + len(lst)
    idx = np.array([h for lst in lists for h in lst], dtype=np.int64)
    return indptr, idx


def _as_blocks(arr, rows: int, d: int, name: str) -> np.ndarray:
    out = np.asarray(arr, dtype=np.float64)
    if out.shape != (rows, d):
        raise ValueError(f"{name} must have shape ({rows}, {d}), got {out.shape}")
    return out


def solve_m_plus_a(p: SplittingProblem, w, v):
    """Apply (M + A)^{-1} to the block pair (w, v).

    The n upper blocks come from the forward sweep
    ``x_i = J_{A_i/d_i}(w_i/d_i + (2/d_i) sum_{(h,i) in E} x_h)``; the
    lower blocks are ``y = v - 2 Z^T x``.
    """
    w = _as_blocks(w, p.n, p.d, "w")
    v = _as_blocks(v, p.n - 1, p.d, "v")
    x = np.zeros((p.n, p.d))
    for i in range(p.n):
        t = w[i] * p._dinv[i]
        for h in p.pred[i]:
            t = t + (2.0 * p._dinv[i]) * x[h]
        try:
            x[i] = resolvent(p.ops[i], t, p._dinv[i])
        except Exception as exc:
            raise RuntimeError(f"resolvent failed at node {i + 1}: {exc}") from exc
    y = v - 2.0 * (p.zt @ x)
    return x, y


def _sweep_expanded(p: SplittingProblem, w, v):
    # node input of the expanded operator: the G'-coupling of w, the lifted
    # governing blocks, and the already-computed shadow blocks
    zv = p.z @ v
    x = np.zeros((p.n, p.d))
    for i in range(p.n):
        t = p.deg_sub[i] * w[i] + zv[i]
        for h in p.nbr_sub[i]:
            t = t - w[h]
        for h in p.pred[i]:
            t = t + 2.0 * x[h]
        try:
            x[i] = resolvent(p.ops[i], t * p._dinv[i], p._dinv[i])
        except Exception as exc:
            raise RuntimeError(f"resolvent failed at node {i + 1}: {exc}") from exc
    return x


def _sweep_reduced(p: SplittingProblem, v):
    zv = p.z @ v
    x = np.zeros((p.n, p.d))
    for i in range(p.n):
        t = zv[i]
        for h in p.pred[i]:
            t = t + 2.0 * x[h]
        try:
            x[i] = resolvent(p.ops[i], t * p._dinv[i], p._dinv[i])
        except Exception as exc:
            raise RuntimeError(f"resolvent failed at node {i + 1}: {exc}") from exc
    return x


def apply_T(p: SplittingProblem, w, v):
    """One application of the expanded fixed-point operator.

    Returns the shadow blocks x and the updated governing blocks
    ``v + Z^T (w - 2x)``.
    """
    w = _as_blocks(w, p.n, p.d, "w")
    v = _as_blocks(v, p.n - 1, p.d, "v")
    x = _sweep_expanded(p, w, v)
    return x, v + p.zt @ (w - 2.0 * x)


def apply_T_tilde(p: SplittingProblem, v):
    """One application of the reduced fixed-point operator.

    Returns the shadow blocks x and ``v - Z^T x``.
    """
    v = _as_blocks(v, p.n - 1, p.d, "v")
    x = _sweep_reduced(p, v)
    return x, v - p.zt @ x


def apply_M(p: SplittingProblem, w, v):
    """The preconditioner as a block map: (Lap(G') w + Z v, Z^T w + v)."""
    w = _as_blocks(w, p.n, p.d, "w")
    v = _as_blocks(v, p.n - 1, p.d, "v")
    lap = laplacian(p.pair.sub).astype(np.float64)
    return lap @ w + p.z @ v, p.zt @ w + v


def apply_C_star(p: SplittingProblem, w, v) -> np.ndarray:
    """The reduction map C^*: (w, v) -> Z^T w + v."""
    w = _as_blocks(w, p.n, p.d, "w")
    v = _as_blocks(v, p.n - 1, p.d, "v")
    return p.zt @ w + v


@dataclass
class StopRule:
    """Relative stop rule: residual <= tol * max(1, ||v||_F), or the
    iteration budget."""

    tol: float = DEFAULT_TOL
    max_iters: int = DEFAULT_MAX_ITERS


@dataclass
class TraceRecord:
    k: int
    x: np.ndarray
    v: np.ndarray
    residual: float
    w: np.ndarray | None = None


@dataclass
class Trace:
    """Outcome of a run: final blocks, per-iteration residuals, and full
    per-iteration records when state recording was requested."""

    x: np.ndarray
    v: np.ndarray
    residuals: np.ndarray
    converged: bool
    stop_reason: str
    w: np.ndarray | None = None
    iterations: list[TraceRecord] = field(default_factory=list)

    @property
    def k_final(self) -> int:
        return len(self.residuals)


def _theta_array(theta, max_iters: int) -> np.ndarray:
    if np.isscalar(theta):
        th = float(theta)
        if not 0.0 <= th <= 2.0:
            raise ValueError(f"relaxation parameter must lie in [0, 2], got {th}")
        if th == 0.0 or th == 2.0:
            log.warning(
                "constant relaxation %.1f gives no convergence guarantee", th
            )
        return np.full(max_iters, th)
    arr = np.asarray(theta, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise ValueError("relaxation schedule is empty")
    if arr.min() < 0.0 or arr.max() > 2.0:
        raise ValueError("relaxation schedule must lie in [0, 2]")
    # a finite schedule bounds the run length by its own length
    return arr[:max_iters]


def _status_to_trace(status: int, k_end: int):
    if status == _kernels.STATUS_DIVERGED:
        raise DivergenceError(k_end)
    converged = status == _kernels.STATUS_CONVERGED
    return converged, ("tol" if converged else "max_iters")


def run_alg2(p: SplittingProblem, v0, theta=1.0, stop: StopRule | None = None,
             record_states: bool = False) -> Trace:
    """Run the reduced iteration v <- v - theta_k Z^T x from ``v0``.

    ``theta`` is a constant in [0, 2] or a finite per-iteration schedule
    (which then also caps the iteration count).  With ``record_states``
    the trace keeps every iterate; otherwise only residuals and the final
    state, which lets subspace problems run on the compiled kernel.
    """
    stop = stop or StopRule()
    if stop.max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    v0 = _as_blocks(v0, p.n - 1, p.d, "v0")
    thetas = _theta_array(theta, stop.max_iters)

    if p.all_subspace and not record_states:
        proj, pred_indptr, pred_idx, _, _ = p._kernel_inputs()
        x, v, residuals, status = _kernels.alg2_sweep(
            p.z, p.zt, proj, pred_indptr, pred_idx, p._dinv, v0, thetas,
            stop.tol)
        converged, reason = _status_to_trace(status, len(residuals))
        return Trace(x, v, residuals, converged, reason)

    v = v0.copy()
    residuals: list[float] = []
    records: list[TraceRecord] = []
    converged = False
    reason = "max_iters"
    x = np.zeros((p.n, p.d))
    for k, th in enumerate(thetas):
        x = _sweep_reduced(p, v)
        g = p.zt @ x
        res = float(np.sqrt(np.sum(g * g)))
        residuals.append(res)
        if not np.isfinite(res) or not np.all(np.isfinite(x)):
            raise DivergenceError(k + 1)
        scale = max(1.0, float(np.linalg.norm(v)))
        v = v - th * g
        if record_states:
            records.append(TraceRecord(k + 1, x.copy(), v.copy(), res))
        if res <= stop.tol * scale:
            converged = True
            reason = "tol"
            break
    return Trace(x, v, np.asarray(residuals), converged, reason,
                 iterations=records)


def run_alg1(p: SplittingProblem, w0, v0, theta=1.0,
             stop: StopRule | None = None,
             record_states: bool = False) -> Trace:
    """Run the expanded iteration from ``(w0, v0)``.

    The governing update reads the pre-update w (the v-line uses w^k, not
    the freshly relaxed w^{k+1}), so w is buffered across the two updates.
    """
    stop = stop or StopRule()
    if stop.max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    w0 = _as_blocks(w0, p.n, p.d, "w0")
    v0 = _as_blocks(v0, p.n - 1, p.d, "v0")
    thetas = _theta_array(theta, stop.max_iters)

    if p.all_subspace and not record_states:
        proj, pred_indptr, pred_idx, nbr_indptr, nbr_idx = p._kernel_inputs()
        x, w, v, residuals, status = _kernels.alg1_sweep(
            p.z, p.zt, proj, pred_indptr, pred_idx, nbr_indptr, nbr_idx,
            p.deg_sub, p._dinv, w0, v0, thetas, stop.tol)
        converged, reason = _status_to_trace(status, len(residuals))
        return Trace(x, v, residuals, converged, reason, w=w)

    w = w0.copy()
    v = v0.copy()
    residuals: list[float] = []
    records: list[TraceRecord] = []
    converged = False
    reason = "max_iters"
    x = np.zeros((p.n, p.d))
    for k, th in enumerate(thetas):
        x = _sweep_expanded(p, w, v)
        g = p.zt @ (w - 2.0 * x)
        res = float(np.sqrt(np.sum(g * g)))
        residuals.append(res)
        if not np.isfinite(res) or not np.all(np.isfinite(x)):
            raise DivergenceError(k + 1)
        scale = max(1.0, float(np.linalg.norm(v)))
        v = v + th * g
        w = (1.0 - th) * w + th * x
        if record_states:
            records.append(TraceRecord(k + 1, x.copy(), v.copy(), res, w=w.copy()))
        if res <= stop.tol * scale:
            converged = True
            reason = "tol"
            break
    return Trace(x, v, np.asarray(residuals), converged, reason, w=w,
                 iterations=records)


# ---------------------------------------------------------------------------
# trace serialization

def _fmt(x: float) -> str:
    return format(x, ".17g")


def trace_header(n: int, d: int) -> list[str]:
    cols = ["k", "residual"]
    cols += [f"x{i}_{c}" for i in range(1, n + 1) for c in range(d)]
    cols += [f"v{j}_{c}" for j in range(1, n) for c in range(d)]
    return cols


def trace_to_csv(trace: Trace, path, n: int, d: int) -> None:
    """Write per-iteration records as CSV (requires a trace produced with
    ``record_states=True``)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(trace_header(n, d))
        for rec in trace.iterations:
            row = [str(rec.k), _fmt(rec.residual)]
            row += [_fmt(val) for val in rec.x.reshape(-1)]
            row += [_fmt(val) for val in rec.v.reshape(-1)]
            writer.writerow(row)


def trace_records_from_csv(path, n: int, d: int) -> list[TraceRecord]:
    """Parse a trace CSV back into records (w blocks are not stored)."""
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != trace_header(n, d):
            raise ValueError("trace CSV header does not match (n, d)")
        for row in reader:
            k = int(row[0])
            res = float(row[1])
            vals = np.array([float(s) for s in row[2:]])
            x = vals[: n * d].reshape(n, d)
            v = vals[n * d:].reshape(n - 1, d)
            records.append(TraceRecord(k, x, v, res))
    return records


def trace_to_json(trace: Trace, path) -> None:
    """JSON mirror of the CSV records plus the run outcome."""
    doc = {
        "converged": trace.converged,
        "stop_reason": trace.stop_reason,
        "iterations": trace.k_final,
        "records": [
            {
                "k": rec.k,
                "residual": rec.residual,
                "x": rec.x.tolist(),
                "v": rec.v.tolist(),
                "w": rec.w.tolist() if rec.w is not None else None,
            }
            for rec in trace.iterations
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
