"""Random-matrix side: eigensolver, eigenvalue densities and ensembles.

The joint eigenvalue density used here is the density of the ORDERED
spectrum, supported on the chamber x_1 < ... < x_n; with the normalisation
Z = (2 pi)^{n/2} prod_{j<n} j! it integrates to 1 there (equivalently to n!
over all of R^n).  The antisymmetric pairing product over i != j is
implemented as h(x)^2, h the Vandermonde product, which fixes its sign.

The dense Hermitian eigensolver is the in-repo Householder + implicit-shift
QL routine from ``_kernels.eigh``; numpy's LAPACK binding appears only as a
test oracle and as the numpy-backend batch fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels.eigh import eigvalsh_batch, eigvalsh_dense
from .sampling import HermitianMatrix, as_generator, gue_matrix_batch


@dataclass(frozen=True)
class Spectrum:
    """Sorted eigenvalues of a Hermitian matrix."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=np.float64)
        object.__setattr__(self, "eigenvalues", ev)
        if ev.ndim != 1 or ev.size < 1:
            raise ValueError("need at least one eigenvalue")
        if np.any(np.diff(ev) < 0):
            raise ValueError("eigenvalues must be sorted ascending")

    @property
    def n(self) -> int:
        return int(self.eigenvalues.size)

    def to_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "eigenvalue"])
            for i, ev in enumerate(self.eigenvalues):
                w.writerow([i, repr(float(ev))])


def largest_component(spectrum: Spectrum) -> float:
    """Top of the spectrum."""
    return float(spectrum.eigenvalues[-1])


# ---------------------------------------------------------------------------
# densities
# ---------------------------------------------------------------------------

def vandermonde_h(x) -> float:
    """prod_{i<j} (x_j - x_i)."""
    x = np.asarray(x, dtype=np.float64)
    out = 1.0
    for i in range(x.size - 1):
        out *= float(np.prod(x[i + 1:] - x[i]))
    return out


def log_weyl_factor(x) -> float:
    """log h(x)^2, -inf at ties; used to keep n > 8 evaluations in range."""
    x = np.asarray(x, dtype=np.float64)
    acc = 0.0
    for i in range(x.size - 1):
        d = np.abs(x[i + 1:] - x[i])
        if np.any(d == 0.0):
            return -np.inf
        acc += 2.0 * float(np.sum(np.log(d)))
    return acc


def weyl_density(lam) -> float:
    """Ordered-spectrum GUE density h(lam)^2 exp(-|lam|^2/2) / Z,
    Z = (2 pi)^{n/2} prod_{j=1}^{n-1} j!."""
    lam = np.asarray(lam, dtype=np.float64)
    n = lam.size
    log_z = 0.5 * n * math.log(2.0 * math.pi) + sum(math.lgamma(j + 1) for j in range(1, n))
    if n > 8:
        lg = log_weyl_factor(lam)
        if lg == -np.inf:
            return 0.0
        return math.exp(lg - 0.5 * float(np.sum(lam ** 2)) - log_z)
    h = vandermonde_h(lam)
    return h * h * math.exp(-0.5 * float(np.sum(lam ** 2))) / math.exp(log_z)


def c_t(n: int, t: float) -> float:
    """Entrance-law normalisation [t^{n(n-1)/2} prod_{j=1}^{n-1} j!]^{-1}."""
    if n < 1 or t <= 0:
        raise ValueError("need n >= 1 and t > 0")
    log_c = -0.5 * n * (n - 1) * math.log(t) - sum(math.lgamma(j + 1) for j in range(1, n))
    return math.exp(log_c)


def charlier_pmf(y, t: float) -> float:
    """Mass of the Charlier ensemble at y (componentwise >= 0 integers):
    C_t h(x* + y)^2 prod_i Poisson(t) mass at (x* + y)_i, x* = (0, ..., n-1).

    The law lives where x* + y is strictly increasing (the conditioned walk
    never leaves the chamber); ties and out-of-order points carry zero mass.
    The Poisson weights sit at the shifted chamber positions x* + y; this is
    what the Karlin-McGregor determinant for the transform started at x*
    reduces to, and it is what makes the total mass 1.
    """
    y = np.asarray(y, dtype=np.int64)
    if np.any(y < 0):
        raise ValueError("y must be componentwise nonnegative")
    n = y.size
    xstar = np.arange(n)
    pos = xstar + y
    if np.any(np.diff(pos) <= 0):
        return 0.0
    h = vandermonde_h(pos.astype(np.float64))
    log_pois = float(np.sum(-t + pos * math.log(t)
                            - np.array([math.lgamma(v + 1.0) for v in pos])))
    log_c = -0.5 * n * (n - 1) * math.log(t) - sum(math.lgamma(j + 1) for j in range(1, n))
    return math.exp(log_c + 2.0 * math.log(abs(h)) + log_pois)


# ---------------------------------------------------------------------------
# eigensolver and spectral sampling
# ---------------------------------------------------------------------------

def eigenvalues(H: HermitianMatrix | np.ndarray, cap: int = 30) -> Spectrum:
    """All eigenvalues via Householder tridiagonalisation + implicit QL."""
    m = H.entries if isinstance(H, HermitianMatrix) else np.asarray(H, dtype=np.complex128)
    return Spectrum(eigvalsh_dense(m, cap=cap))


def sample_gue_spectrum(n: int, t: float, rng) -> Spectrum:
    """Spectrum of the time-t Gaussian ensemble marginal: sqrt(t) x GUE."""
    if t <= 0:
        raise ValueError("t must be positive")
    gen = as_generator(rng)
    H = gue_matrix_batch(1, n, gen)[0]
    return Spectrum(np.sqrt(t) * eigvalsh_dense(H))


def sample_gue_spectra_batch(n: int, t: float, count: int, rng) -> np.ndarray:
    """(count, n) sorted spectra; numba backend uses the in-repo solver."""
    gen = as_generator(rng)
    out = np.empty((count, n))
    chunk = max(1, min(count, 1 << 14))
    at = 0
    while at < count:
        m = min(chunk, count - at)
        H = gue_matrix_batch(m, n, gen)
        out[at:at + m] = eigvalsh_batch(H)
        at += m
    return np.sqrt(t) * out
