"""Batched Monte Carlo pipelines behind the distributional checks.

Everything here is deterministic given a generator: chunk sizes are fixed
constants, draws happen in a fixed order, and rejection loops truncate to an
exact target count.
"""

from __future__ import annotations

import numpy as np

from ._kernels.events import pair_event_endpoints
from ._kernels.grid import gamma_endpoints_batch
from .sampling import as_generator, poisson_jump_matrix

_GRID_CHUNK = 4096
_EVENT_CHUNK = 1 << 15


def gamma_brownian_endpoints(n: int, samples: int, dt: float, rng,
                             t_end: float = 1.0) -> np.ndarray:
    """(samples, n) endpoint components of the n-path transform of driftless
    Brownian grid paths at time t_end."""
    gen = as_generator(rng)
    K = int(round(t_end / dt))
    out = np.empty((samples, n))
    at = 0
    sd = np.sqrt(dt)
    while at < samples:
        m = min(_GRID_CHUNK, samples - at)
        inc = gen.normal(0.0, sd, size=(m, n, K))
        vals = np.concatenate([np.zeros((m, n, 1)), np.cumsum(inc, axis=2)], axis=2)
        out[at:at + m] = gamma_endpoints_batch(vals)
        at += m
    return out


def _merged_event_values(times: np.ndarray, t_cut: float, n: int):
    """Sorted merged events of n unit-jump paths into candidate-value tensors.

    times: (rows, n, G) jump epochs with +inf padding, all finite epochs
    <= t_cut.  Returns (rows, n, E+1) path values at [origin] + merged event
    slots; +inf padding slots repeat the final values, which is harmless for
    the candidate-set kernels.
    """
    rows = times.shape[0]
    E = times.shape[1] * times.shape[2]
    flat = times.reshape(rows, E)
    ids = np.tile(np.repeat(np.arange(n), times.shape[2]), (rows, 1))
    order = np.argsort(flat, axis=1, kind="stable")
    sorted_t = np.take_along_axis(flat, order, axis=1)
    sorted_ids = np.where(np.isfinite(sorted_t),
                          np.take_along_axis(ids, order, axis=1), -1)
    vals = np.empty((rows, n, E + 1))
    for i in range(n):
        vals[:, i, 0] = 0.0
        np.cumsum(sorted_ids == i, axis=1, out=vals[:, i, 1:])
    return vals


def charlier_transform_endpoints(n: int, t: float, samples: int, rng) -> np.ndarray:
    """(samples, n) integer components of the transform of n unit-rate
    counting paths at time t."""
    gen = as_generator(rng)
    out = np.empty((samples, n), dtype=np.int64)
    at = 0
    while at < samples:
        m = min(_EVENT_CHUNK, samples - at)
        per_path = [poisson_jump_matrix(1.0, t, m, gen)[0] for _ in range(n)]
        G = max(p.shape[1] for p in per_path)
        jumps = np.full((m, n, G), np.inf)
        for i, p in enumerate(per_path):
            jumps[:, i, :p.shape[1]] = p
        vals = _merged_event_values(jumps, t, n)
        comp = gamma_endpoints_batch(vals)
        out[at:at + m] = np.rint(comp).astype(np.int64)
        at += m
    return out


def _pair_event_rows(lam: float, mu: float, length: float, rows: int, gen):
    """Merged +-1 tagged events of an (A, S) pair on (0, length]."""
    a_jumps, a_counts = poisson_jump_matrix(lam, length, rows, gen)
    s_jumps, s_counts = poisson_jump_matrix(mu, length, rows, gen)
    times = np.concatenate([a_jumps, s_jumps], axis=1)
    tags = np.concatenate([np.ones_like(a_jumps), -np.ones_like(s_jumps)], axis=1)
    order = np.argsort(times, axis=1, kind="stable")
    times = np.take_along_axis(times, order, axis=1)
    tags = np.take_along_axis(tags, order, axis=1)
    n_events = a_counts + s_counts
    return times, tags, n_events


def gamma2_pair_pmf(lam: float, mu: float, t_end: float, samples: int, rng) -> dict:
    """Joint pmf of the two transform components of an (A, S) pair at t_end."""
    gen = as_generator(rng)
    counts: dict = {}
    at = 0
    while at < samples:
        m = min(_EVENT_CHUNK, samples - at)
        times, tags, n_events = _pair_event_rows(lam, mu, t_end, m, gen)
        cut = (times <= t_end).sum(axis=1)
        res = pair_event_endpoints(tags, n_events, cut)
        a_t = res[:, 0]
        s_t = cut - a_t
        lo = (s_t + res[:, 1]).astype(np.int64)       # inf-convolution at t_end
        hi = (a_t - res[:, 1]).astype(np.int64)       # sup-convolution at t_end
        keys, cts = np.unique(np.stack([lo, hi], axis=1), axis=0, return_counts=True)
        for key, c in zip(keys, cts):
            counts[(int(key[0]), int(key[1]))] = counts.get((int(key[0]), int(key[1])), 0) + int(c)
        at += m
    return {k: v / samples for k, v in counts.items()}


def conditioned_pair_pmf(lam: float, mu: float, t_end: float, pad: float,
                         target: int, rng) -> dict:
    """Joint endpoint pmf of (A(t_end), S(t_end)) conditioned on A <= S over
    the padded window, by rejection; exactly `target` accepted samples."""
    gen = as_generator(rng)
    counts: dict = {}
    accepted = 0
    while accepted < target:
        m = _EVENT_CHUNK
        times, tags, n_events = _pair_event_rows(lam, mu, t_end + pad, m, gen)
        cut = (times <= t_end).sum(axis=1)
        res = pair_event_endpoints(tags, n_events, cut)
        ok = res[:, 3] <= 0.0
        a_t = res[ok, 0].astype(np.int64)
        s_t = (cut[ok] - res[ok, 0]).astype(np.int64)
        take = min(a_t.size, target - accepted)
        keys, cts = np.unique(np.stack([a_t[:take], s_t[:take]], axis=1),
                              axis=0, return_counts=True)
        for key, c in zip(keys, cts):
            counts[(int(key[0]), int(key[1]))] = counts.get((int(key[0]), int(key[1])), 0) + int(c)
        accepted += take
    return {k: v / target for k, v in counts.items()}


def coarse_increments(path_values: np.ndarray, every: int) -> np.ndarray:
    """Increments over blocks of `every` grid cells (drops the remainder)."""
    K = (path_values.size - 1) // every
    v = path_values[: K * every + 1 : every]
    return np.diff(v)
