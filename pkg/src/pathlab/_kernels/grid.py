"""Batched kernels for min-plus / max-plus transforms on sampled paths.

A batch is an array ``vals`` of shape (ns, n, K): ns independent samples of an
n-path bundle, each path given by its values at K ordered candidate points
(grid points, or merged jump epochs padded with repeats).  ``vals[:, :, 0]``
must be the common origin value 0.  Candidate-point semantics make the same
kernel exact both for uniform grids and for piecewise-constant paths (where
left limits coincide with the previous candidate value).

Two implementations of each kernel: a numba per-sample loop (default) and a
numpy version built on ufunc accumulates.  ``PATHLAB_NO_NUMBA`` selects.
"""

import numpy as np

from .backend import NUMBA_ENABLED, njit


# ---------------------------------------------------------------------------
# full transform of an n-path bundle, endpoint components only
# ---------------------------------------------------------------------------

@njit(cache=True)
def _gamma_endpoints_loop(vals, out):
    ns, n, K = vals.shape
    cur = np.empty((n, K))
    nxt = np.empty((n, K))
    for s in range(ns):
        for i in range(n):
            for j in range(K):
                cur[i, j] = vals[s, i, j]
        level = n
        comp = 0
        while level > 1:
            # fold the inf-chain P_j while emitting g_j = f_{j+1} (sup) P_j
            for j in range(1, level):
                runmax = cur[j, 0] - cur[0, 0]
                runmin = cur[0, 0] - cur[j, 0]
                for t in range(K):
                    d = cur[j, t] - cur[0, t]
                    if d > runmax:
                        runmax = d
                    if -d < runmin:
                        runmin = -d
                    nxt[j - 1, t] = cur[0, t] + runmax   # f_j (sup) P_{j-1}
                    cur[0, t] = cur[j, t] + runmin       # P_j, in place
            out[s, comp] = cur[0, K - 1]
            comp += 1
            level -= 1
            tmp = cur
            cur = nxt
            nxt = tmp
        out[s, comp] = cur[0, K - 1]


def _gamma_endpoints_numpy(vals, out):
    ns, n, K = vals.shape
    cur = [np.array(vals[:, i, :]) for i in range(n)]
    comp = 0
    while len(cur) > 1:
        P = cur[0]
        nxt = []
        for j in range(1, len(cur)):
            f = cur[j]
            nxt.append(P + np.maximum.accumulate(f - P, axis=1))
            P = f + np.minimum.accumulate(P - f, axis=1)
        out[:, comp] = P[:, -1]
        comp += 1
        cur = nxt
    out[:, comp] = cur[0][:, -1]


def gamma_endpoints_batch(vals: np.ndarray) -> np.ndarray:
    """Transform components at the final candidate point, shape (ns, n)."""
    vals = np.ascontiguousarray(vals, dtype=np.float64)
    ns, n, _ = vals.shape
    out = np.empty((ns, n))
    if NUMBA_ENABLED:
        _gamma_endpoints_loop(vals, out)
    else:
        _gamma_endpoints_numpy(vals, out)
    return out


# ---------------------------------------------------------------------------
# left-to-right inf-chain over a batch, full value trajectory of the chain
# ---------------------------------------------------------------------------

@njit(cache=True)
def _chain_inf_loop(vals, out):
    ns, n, K = vals.shape
    for s in range(ns):
        for t in range(K):
            out[s, t] = vals[s, 0, t]
        for i in range(1, n):
            runmin = out[s, 0] - vals[s, i, 0]
            for t in range(K):
                d = out[s, t] - vals[s, i, t]
                if d < runmin:
                    runmin = d
                out[s, t] = vals[s, i, t] + runmin
    return out


def _chain_inf_numpy(vals, out):
    out[:] = vals[:, 0, :]
    n = vals.shape[1]
    for i in range(1, n):
        f = vals[:, i, :]
        out[:] = f + np.minimum.accumulate(out - f, axis=1)
    return out


def chain_inf_batch(vals: np.ndarray) -> np.ndarray:
    """(f_1 (inf) f_2 (inf) ... (inf) f_n) values at every candidate point."""
    vals = np.ascontiguousarray(vals, dtype=np.float64)
    ns, _, K = vals.shape
    out = np.empty((ns, K))
    if NUMBA_ENABLED:
        _chain_inf_loop(vals, out)
    else:
        _chain_inf_numpy(vals, out)
    return out


# ---------------------------------------------------------------------------
# inf-chain of counting paths, streamed over merged jump events
# ---------------------------------------------------------------------------

@njit(cache=True)
def _counting_chain_loop(path_ids, n, checkpoints, out):
    # C[k] = value of the inf-chain over paths 1..k+1; one O(1) update per
    # event: at a jump of path p only C_p can change, to min(C_p + 1, C_{p-1}).
    C = np.zeros(n)
    ci = 0
    for e in range(path_ids.shape[0]):
        while ci < checkpoints.shape[0] and checkpoints[ci] == e:
            out[ci] = C[n - 1]
            ci += 1
        p = path_ids[e]
        if p == 0:
            C[0] += 1.0
        else:
            v = C[p] + 1.0
            if C[p - 1] < v:
                v = C[p - 1]
            C[p] = v
    while ci < checkpoints.shape[0]:
        out[ci] = C[n - 1]
        ci += 1


def _counting_chain_numpy(path_ids, n, checkpoints, out):
    prev = None
    for k in range(n):
        g = np.cumsum(path_ids == k).astype(np.float64)
        if prev is None:
            cur = g
        else:
            # prepended 0 = value of prev - g before any event (common origin)
            cur = g + np.minimum.accumulate(np.concatenate(([0.0], prev - g)))[1:]
        prev = cur
    full = np.concatenate(([0.0], prev))
    out[:] = full[checkpoints]


def counting_chain_at(path_ids: np.ndarray, n: int, checkpoints: np.ndarray) -> np.ndarray:
    """Inf-chain of n unit-jump counting paths evaluated at event ranks.

    path_ids: which path jumps at each merged event, time-ordered.
    checkpoints: number of events preceding each query time (searchsorted rank).
    """
    path_ids = np.ascontiguousarray(path_ids, dtype=np.int64)
    checkpoints = np.ascontiguousarray(checkpoints, dtype=np.int64)
    out = np.empty(checkpoints.shape[0])
    if NUMBA_ENABLED:
        _counting_chain_loop(path_ids, n, checkpoints, out)
    else:
        _counting_chain_numpy(path_ids, n, checkpoints, out)
    return out
