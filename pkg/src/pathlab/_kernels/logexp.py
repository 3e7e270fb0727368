"""Stable log-integral scans used by the log-sum-exp world.

All integrals are Riemann sums on uniform grids, evaluated in log space.
The numpy fallback rides on ``np.logaddexp.accumulate`` (sequential and
stable in C); the numba path runs the same recursion as an explicit loop
with the usual max-shifted pairwise update.
"""

import numpy as np

from .backend import NUMBA_ENABLED, njit


@njit(cache=True)
def _logaddexp(a, b):
    if a == -np.inf:
        return b
    if b == -np.inf:
        return a
    if a < b:
        a, b = b, a
    return a + np.log1p(np.exp(b - a))


@njit(cache=True)
def _cum_logaddexp_loop(x, out):
    acc = -np.inf
    for j in range(x.shape[0]):
        acc = _logaddexp(acc, x[j])
        out[j] = acc


def cum_logaddexp(x: np.ndarray) -> np.ndarray:
    """Running log(sum(exp(x[:j+1]))) along the last axis of a 1-d array."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if NUMBA_ENABLED:
        out = np.empty_like(x)
        _cum_logaddexp_loop(x, out)
        return out
    return np.logaddexp.accumulate(x)


@njit(cache=True)
def _polymer_chain_loop(binc, logdt):
    # G_k(j) = log int F_{k-1}(s) exp(B_k(s, t_j)) ds, left-endpoint cells.
    n, K = binc.shape
    cur = np.empty(K + 1)
    nxt = np.empty(K + 1)
    bk = np.empty(K + 1)
    cur[0] = 0.0
    for j in range(K):
        cur[j + 1] = cur[j] + binc[0, j]
    for k in range(1, n):
        bk[0] = 0.0
        for j in range(K):
            bk[j + 1] = bk[j] + binc[k, j]
        nxt[0] = -np.inf
        acc = -np.inf
        for j in range(K):
            acc = _logaddexp(acc, cur[j] - bk[j])
            nxt[j + 1] = bk[j + 1] + logdt + acc
        for j in range(K + 1):
            cur[j] = nxt[j]
    return cur


def _polymer_chain_numpy(binc, logdt):
    n, K = binc.shape
    bvals = np.concatenate([np.zeros((n, 1)), np.cumsum(binc, axis=1)], axis=1)
    cur = bvals[0]
    for k in range(1, n):
        acc = np.logaddexp.accumulate(cur[:-1] - bvals[k, :-1])
        nxt = np.empty(K + 1)
        nxt[0] = -np.inf
        nxt[1:] = bvals[k, 1:] + logdt + acc
        cur = nxt
    return cur


def polymer_log_partition(binc: np.ndarray, dt: float) -> float:
    """log Z for the nested simplex integral of n path increments (n, K)."""
    binc = np.ascontiguousarray(binc, dtype=np.float64)
    logdt = np.log(dt)
    if NUMBA_ENABLED:
        return float(_polymer_chain_loop(binc, logdt)[-1])
    return float(_polymer_chain_numpy(binc, logdt)[-1])
