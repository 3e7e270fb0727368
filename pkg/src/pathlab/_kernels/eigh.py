"""Dense Hermitian eigenvalue solver.

Two classical stages: complex Householder reduction to tridiagonal form,
with a diagonal phase similarity making the sub-diagonal real nonnegative,
followed by implicit-shift QL iteration on the real tridiagonal matrix.
Eigenvalues only; iteration cap 30 sweeps per eigenvalue.

The solver itself is the same algorithm under both backends (jitted or
interpreted).  Batched spectrum sampling additionally has a LAPACK-backed
numpy fallback, see ``eigvalsh_batch``.
"""

import numpy as np

from .backend import NUMBA_ENABLED, njit

_EPS = 2.220446049250313e-16


@njit(cache=True)
def _tridiagonalize(A):
    # A destroyed; returns (d, e) with e the real nonnegative sub-diagonal.
    n = A.shape[0]
    for k in range(n - 2):
        norm2 = 0.0
        for i in range(k + 1, n):
            norm2 += A[i, k].real ** 2 + A[i, k].imag ** 2
        normx = np.sqrt(norm2)
        if normx == 0.0:
            continue
        alpha = A[k + 1, k]
        aa = np.abs(alpha)
        phase = alpha / aa if aa > 0.0 else 1.0 + 0.0j
        # v = x + phase*|x| e1 avoids cancellation; P = I - beta v v*
        v = np.empty(n - k - 1, dtype=np.complex128)
        for i in range(k + 1, n):
            v[i - k - 1] = A[i, k]
        v[0] += phase * normx
        vnorm2 = 0.0
        for i in range(v.shape[0]):
            vnorm2 += v[i].real ** 2 + v[i].imag ** 2
        if vnorm2 == 0.0:
            continue
        beta = 2.0 / vnorm2
        m = n - k - 1
        p = np.zeros(m, dtype=np.complex128)
        for i in range(m):
            acc = 0.0 + 0.0j
            for j in range(m):
                acc += A[k + 1 + i, k + 1 + j] * v[j]
            p[i] = beta * acc
        vp = 0.0 + 0.0j
        for i in range(m):
            vp += np.conj(v[i]) * p[i]
        for i in range(m):
            p[i] = p[i] - (0.5 * beta * vp) * v[i]
        for i in range(m):
            for j in range(m):
                A[k + 1 + i, k + 1 + j] -= p[i] * np.conj(v[j]) + v[i] * np.conj(p[j])
        A[k + 1, k] = -phase * normx
        for i in range(k + 2, n):
            A[i, k] = 0.0

    d = np.empty(n)
    e = np.empty(max(n - 1, 0))
    for i in range(n):
        d[i] = A[i, i].real
    for k in range(n - 1):
        e[k] = np.abs(A[k + 1, k])
    return d, e


@njit(cache=True)
def _ql_implicit(d, e, cap):
    # Implicit-shift QL on (d, e); e[n-1] is workspace. Returns 0 on success.
    n = d.shape[0]
    if n == 1:
        return 0
    w = np.zeros(n)
    for i in range(n - 1):
        w[i] = e[i]
    for l in range(n):
        iters = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(w[m]) <= _EPS * dd:
                    break
                m += 1
            if m == l:
                break
            iters += 1
            if iters > cap:
                return 1
            g = (d[l + 1] - d[l]) / (2.0 * w[l])
            r = np.hypot(g, 1.0)
            sgn = r if g >= 0.0 else -r
            g = d[m] - d[l] + w[l] / (g + sgn)
            s = 1.0
            c = 1.0
            p = 0.0
            broke = False
            for i in range(m - 1, l - 1, -1):
                f = s * w[i]
                b = c * w[i]
                r = np.hypot(f, g)
                w[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    w[m] = 0.0
                    broke = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
            if not broke:
                d[l] -= p
                w[l] = g
                w[m] = 0.0
    return 0


@njit(cache=True)
def _eigvalsh_single(H, cap):
    A = H.copy()
    d, e = _tridiagonalize(A)
    status = _ql_implicit(d, e, cap)
    return np.sort(d), status


def eigvalsh_dense(H: np.ndarray, cap: int = 30):
    """All eigenvalues of a Hermitian matrix, ascending. Raises on stall."""
    H = np.ascontiguousarray(H, dtype=np.complex128)
    vals, status = _eigvalsh_single(H, cap)
    if status != 0:
        raise ArithmeticError("QL iteration exceeded %d sweeps per eigenvalue" % cap)
    return vals


@njit(cache=True)
def _eigvalsh_batch_loop(H, cap, out):
    ns = H.shape[0]
    bad = 0
    for s in range(ns):
        A = H[s].copy()
        d, e = _tridiagonalize(A)
        status = _ql_implicit(d, e, cap)
        if status != 0:
            bad += 1
        out[s] = np.sort(d)
    return bad


def eigvalsh_batch(H: np.ndarray, cap: int = 30) -> np.ndarray:
    """Spectra of a stack of Hermitian matrices (ns, n, n), rows ascending.

    numba backend: the in-repo Householder+QL solver per matrix.
    numpy backend: LAPACK via np.linalg.eigvalsh (throughput plumbing; the
    in-repo solver remains the reference implementation and is tested
    against this route).
    """
    H = np.ascontiguousarray(H, dtype=np.complex128)
    if NUMBA_ENABLED:
        out = np.empty(H.shape[:2])
        bad = _eigvalsh_batch_loop(H, cap, out)
        if bad:
            raise ArithmeticError("QL iteration stalled on %d matrices" % bad)
        return out
    return np.linalg.eigvalsh(H)
