"""Event-driven kernels: piecewise-constant path operators and queue walks.

Piecewise-constant cadlag paths are (jump_times, jump_sizes) pairs with value
0 at the window start.  Operator results are exact: for step inputs the
inf/sup over [start, t] is attained either at an event time or at a left
limit, and a left limit equals the value at the previous event, so a single
ordered walk over the merged events covers the whole candidate set.

The queue walk turns merged arrival/service events into departures via the
one-step dynamics (arrival: length+1; service: departure iff length>0).  The
numpy fallback uses the equivalent reflection formula
``Q_j = X_j + max(q0, -min_{i<=j} X_i)`` on the free walk X.
"""

import numpy as np

from .backend import NUMBA_ENABLED, njit


def merge_event_values(times_a, sizes_a, times_b, sizes_b):
    """Merged distinct event times and cumulative values of both paths there."""
    merged = np.union1d(times_a, times_b)
    ca = np.concatenate(([0.0], np.cumsum(sizes_a)))
    cb = np.concatenate(([0.0], np.cumsum(sizes_b)))
    va = ca[np.searchsorted(times_a, merged, side="right")]
    vb = cb[np.searchsorted(times_b, merged, side="right")]
    return merged, va, vb


@njit(cache=True)
def _step_conv_loop(fv, gv, sign, out):
    # fv, gv: path values at merged events; candidate set includes the window
    # start (value 0).  sign=+1: sup form g + max(f-g); sign=-1: inf form.
    best = 0.0
    for j in range(fv.shape[0]):
        d = sign * (fv[j] - gv[j])
        if d > best:
            best = d
        out[j] = gv[j] + sign * best


def _step_conv_numpy(fv, gv, sign, out):
    d = sign * (fv - gv)
    np.maximum.accumulate(np.maximum(d, 0.0), out=d)
    out[:] = gv + sign * d


def step_conv_values(fv: np.ndarray, gv: np.ndarray, sign: int) -> np.ndarray:
    """Values of f (inf-conv) g (sign=-1) or f (sup-conv) g (sign=+1) at events."""
    out = np.empty_like(fv)
    if NUMBA_ENABLED:
        _step_conv_loop(fv, gv, sign, out)
    else:
        _step_conv_numpy(fv, gv, sign, out)
    return out


@njit(cache=True)
def _queue_walk_loop(order_is_service, q0, dep_flags, q_after):
    q = q0
    for j in range(order_is_service.shape[0]):
        if order_is_service[j]:
            if q > 0:
                q -= 1
                dep_flags[j] = True
        else:
            q += 1
        q_after[j] = q


def _queue_walk_numpy(order_is_service, q0, dep_flags, q_after):
    step = np.where(order_is_service, -1, 1)
    x = np.cumsum(step)
    runmin = np.minimum.accumulate(np.minimum(x, 0))
    q = x + np.maximum(q0, -runmin)
    dep_flags[:] = order_is_service & (np.diff(np.concatenate(([q0], q))) == -1)
    q_after[:] = q


def queue_walk(order_is_service: np.ndarray, q0: int):
    """One pass over merged events; returns (departure flags, queue after each).

    Events must be time-ordered with the service-first tie rule already
    applied by the caller's sort.
    """
    order_is_service = np.ascontiguousarray(order_is_service, dtype=np.bool_)
    dep_flags = np.zeros(order_is_service.shape[0], dtype=np.bool_)
    q_after = np.empty(order_is_service.shape[0], dtype=np.int64)
    if NUMBA_ENABLED:
        _queue_walk_loop(order_is_service, q0, dep_flags, q_after)
    else:
        _queue_walk_numpy(order_is_service, q0, dep_flags, q_after)
    return dep_flags, q_after


# ---------------------------------------------------------------------------
# batched two-path functionals on merged +-1 tagged events (MC hot path)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _pair_endpoints_loop(tags, n_events, cut, out):
    ns = tags.shape[0]
    for s in range(ns):
        phi = 0.0
        runmin = 0.0
        runmax_head = 0.0
        runmax_all = 0.0
        a_cnt = 0.0
        c = cut[s]
        for j in range(n_events[s]):
            t = tags[s, j]
            phi += t
            if j < c:
                if t > 0:
                    a_cnt += 1.0
                if phi < runmin:
                    runmin = phi
                if phi > runmax_head:
                    runmax_head = phi
            if phi > runmax_all:
                runmax_all = phi
        out[s, 0] = a_cnt          # A(T)
        out[s, 1] = runmin         # min over [0,T] of A-S
        out[s, 2] = runmax_head    # max over [0,T] of A-S
        out[s, 3] = runmax_all     # max over the whole window


def _pair_endpoints_numpy(tags, n_events, cut, out):
    ns, E = tags.shape
    idx = np.arange(E)[None, :]
    live = idx < n_events[:, None]
    head = idx < cut[:, None]
    inc = np.where(live, tags, 0.0)
    phi = np.cumsum(inc, axis=1)
    head_phi = np.where(head, phi, np.inf)
    out[:, 1] = np.minimum(np.min(head_phi, axis=1, initial=np.inf), 0.0)
    head_phi = np.where(head, phi, -np.inf)
    out[:, 2] = np.maximum(np.max(head_phi, axis=1, initial=-np.inf), 0.0)
    live_phi = np.where(live, phi, -np.inf)
    out[:, 3] = np.maximum(np.max(live_phi, axis=1, initial=-np.inf), 0.0)
    out[:, 0] = np.sum(np.where(head & (tags > 0), 1.0, 0.0), axis=1)


def pair_event_endpoints(tags: np.ndarray, n_events: np.ndarray, cut: np.ndarray) -> np.ndarray:
    """Batched endpoint functionals of the tagged difference walk phi = A - S.

    tags: (ns, E) with +1 at A-events, -1 at S-events, time-ordered per row;
    n_events: valid prefix length per row; cut: number of events with time <= T.
    Returns columns (A(T), min phi on [0,T], max phi on [0,T], max phi on full window),
    all including the empty prefix (value 0) as a candidate.
    """
    tags = np.ascontiguousarray(tags, dtype=np.float64)
    out = np.empty((tags.shape[0], 4))
    if NUMBA_ENABLED:
        _pair_endpoints_loop(tags, n_events, cut, out)
    else:
        _pair_endpoints_numpy(tags, n_events, cut, out)
    return out
