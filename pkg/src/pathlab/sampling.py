"""Reproducible random input generation.

Every sampler is a pure function of its parameters and an RNG stream.  A
stream is the pair (master_seed, stream_id) fed to numpy's SeedSequence /
PCG64; identical pairs give identical output on every run, and distinct
stream ids give streams safe to treat as independent.  Replicated
experiments derive one stream per replicate so results do not depend on
evaluation order.

Stream ids are namespaced: ``derive_stream(seed, k, namespace)`` packs
crc32(namespace) and the replicate index k into one 64-bit id
(crc32 << 20 | k, k < 2**20), an injective documented mapping.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

from .paths import GridPath, PathDomainError, StepPath

_REPLICATE_BITS = 20


@dataclass(frozen=True)
class RngStream:
    """Reproducible RNG identified by (master_seed, stream_id)."""

    master_seed: int
    stream_id: int

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence((self.master_seed, self.stream_id))
        return np.random.Generator(np.random.PCG64(seq))


def derive_stream(master_seed: int, replicate_index: int, namespace: str = "") -> RngStream:
    """Stream for one replicate of one named experiment."""
    if replicate_index < 0 or replicate_index >= (1 << _REPLICATE_BITS):
        raise ValueError("replicate index out of range")
    sid = (zlib.crc32(namespace.encode()) << _REPLICATE_BITS) | replicate_index
    return RngStream(master_seed, sid)


def as_generator(rng) -> np.random.Generator:
    """Accept an RngStream or a ready numpy Generator."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be an RngStream or numpy Generator")


# ---------------------------------------------------------------------------
# path samplers
# ---------------------------------------------------------------------------

def sample_poisson_path(rate: float, window, rng) -> StepPath:
    """Homogeneous Poisson process on the window, unit jumps.

    Sampled by exact exponential gaps, not thinning.
    """
    if rate <= 0:
        raise ValueError("rate must be positive")
    gen = as_generator(rng)
    t_lo, t_hi = window
    length = t_hi - t_lo
    if length < 0:
        raise PathDomainError("window must have nonnegative length")
    times = []
    t = 0.0
    block = max(16, int(rate * length) + 1)
    while True:
        gaps = gen.exponential(1.0 / rate, size=block)
        arr = t + np.cumsum(gaps)
        inside = arr[arr <= length]
        times.append(inside)
        if arr.size and arr[-1] > length:
            break
        t = arr[-1] if arr.size else t
    jt = np.concatenate(times) + t_lo
    return StepPath(jt, np.ones(jt.size), (t_lo, t_hi))


def sample_brownian_grid(drift: float, dt: float, n_steps: int, rng) -> GridPath:
    """Brownian motion on a grid: iid Normal(drift*dt, dt) increments."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    gen = as_generator(rng)
    inc = gen.normal(drift * dt, np.sqrt(dt), size=n_steps)
    values = np.concatenate(([0.0], np.cumsum(inc)))
    return GridPath(0.0, dt, values)


def sample_srw_path(p_up: float, n_steps: int, rng) -> GridPath:
    """Simple random walk with unit steps, P(+1) = p_up in (1/2, 1)."""
    if not 0.5 < p_up < 1.0:
        raise ValueError("p_up must lie in (1/2, 1)")
    gen = as_generator(rng)
    steps = np.where(gen.random(n_steps) < p_up, 1.0, -1.0)
    return GridPath(0.0, 1.0, np.concatenate(([0.0], np.cumsum(steps))))


def sample_pm1_chain(a: float, b: float, n_steps: int, rng) -> GridPath:
    """Partial sums of the two-state chain on {-1,+1} started at +1.

    P(next=+1 | +1) = a and P(next=-1 | -1) = b, with 0 < b < a < 1.
    """
    if not (0.0 < b < a < 1.0):
        raise ValueError("need 0 < b < a < 1")
    gen = as_generator(rng)
    u = gen.random(n_steps)
    steps = np.empty(n_steps)
    state = 1
    for k in range(n_steps):
        if state == 1:
            state = 1 if u[k] < a else -1
        else:
            state = -1 if u[k] < b else 1
        steps[k] = state
    return GridPath(0.0, 1.0, np.concatenate(([0.0], np.cumsum(steps))))


def sample_gaussian_seq(length: int, rng) -> np.ndarray:
    """iid standard normals."""
    return as_generator(rng).standard_normal(length)


# ---------------------------------------------------------------------------
# random matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HermitianMatrix:
    """Complex matrix with A = A* exact by construction."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=np.complex128)
        object.__setattr__(self, "entries", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("matrix must be square")
        if not np.array_equal(m, m.conj().T):
            raise ValueError("matrix must equal its conjugate transpose")

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def sample_gue(n: int, rng) -> HermitianMatrix:
    """GUE matrix: diagonal standard real normal, off-diagonal complex with
    independent real/imaginary parts of variance 1/2 each."""
    if n < 1:
        raise ValueError("dimension must be at least 1")
    gen = as_generator(rng)
    H = gue_matrix_batch(1, n, gen)[0]
    return HermitianMatrix(H)


def gue_matrix_batch(count: int, n: int, gen: np.random.Generator) -> np.ndarray:
    """(count, n, n) stack of GUE matrices, Hermitian exactly."""
    re = gen.standard_normal((count, n, n))
    im = gen.standard_normal((count, n, n))
    H = np.zeros((count, n, n), dtype=np.complex128)
    iu = np.triu_indices(n, k=1)
    H[:, iu[0], iu[1]] = (re[:, iu[0], iu[1]] + 1j * im[:, iu[0], iu[1]]) * np.sqrt(0.5)
    H = H + np.conj(np.transpose(H, (0, 2, 1)))
    dg = np.arange(n)
    H[:, dg, dg] = re[:, dg, dg]
    return H


# ---------------------------------------------------------------------------
# batched event-time generation (vectorised exponential gaps)
# ---------------------------------------------------------------------------

def poisson_jump_matrix(rate: float, length: float, rows: int, gen: np.random.Generator):
    """(rows, G) padded jump-time matrix on (0, length] plus per-row counts.

    Row gaps are exact exponential draws; columns are appended until every
    row has run past the window, so the construction stays exact.  Padding
    entries are +inf.
    """
    if rate <= 0:
        raise ValueError("rate must be positive")
    cols = max(4, int(rate * length + 4.0 * np.sqrt(rate * length) + 4))
    t = gen.exponential(1.0 / rate, size=(rows, cols)).cumsum(axis=1)
    while np.any(t[:, -1] <= length):
        extra = gen.exponential(1.0 / rate, size=(rows, cols))
        t = np.concatenate([t, t[:, -1:] + extra.cumsum(axis=1)], axis=1)
    counts = (t <= length).sum(axis=1)
    t[t > length] = np.inf
    return t, counts
