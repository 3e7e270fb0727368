"""Output theorems and conditioned-process representations beyond M/M/1.

Covers the drifted-walk and Brownian versions of the output theorem, the
log-integral ("log int exp") queue and its transform algebra, the
Matsumoto-Yor transform, discrete and non-Markovian versions of the 2M - X
representation with exact conditioned-law oracles, and the autoregressive
output/conditioning pair.

Conventions fixed here (see module tests for the pinning computations):

* Brownian-type constructions run on a grid with a pre-window: the initial
  queue value comes from the sup / log-integral over the pre-window, and a
  truncation flag reports when the pre-window was too short.
* log-integrals are left-endpoint Riemann sums with max-shift stabilisation.
  The n-path transform ``pi_n_transform`` alone uses closed sums (both
  endpoints): with strict left endpoints the recursion's boundary values are
  (+inf) - (+inf) at the first few grid cells and NaNs propagate; including
  the right endpoint keeps every level finite and preserves the exact
  sum-conservation identity at all indices.
* The autoregressive construction uses the convergent expansion
  X_n = sum_j a^j b_{n-j} (so X_{n+1} = a X_n + b_{n+1}); the reversed-time
  expansion X_n = sum_j a^j bhat_{n+j} with bhat_n = X_n - a X_{n+1} then
  holds exactly, and bhat_n -> b_n as a -> 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels.logexp import cum_logaddexp
from .paths import GridPath, PathBundle, PathDomainError
from .sampling import as_generator
from .stats import TestReport, corr_bound, ks_one_sample, make_report, normal_cdf, tv_distance


@dataclass(frozen=True)
class LogExpParams:
    """Discretisation settings for log-integral operators."""

    dt: float
    stabilizer: bool = True  # max-shifted accumulation; always on

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if not self.stabilizer:
            raise ValueError("unstabilised accumulation is not supported")


@dataclass(frozen=True)
class ArParams:
    """Autoregressive coefficient, series horizon and conditioning value."""

    a: float
    horizon: int
    x: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.a < 1.0:
            raise ValueError("need 0 < a < 1")


# ---------------------------------------------------------------------------
# 2M - X and conditioned-walk oracles
# ---------------------------------------------------------------------------

def pitman_2m_minus_x(X: GridPath) -> GridPath:
    """2 max_{s<=t} X(s) - X(t) on the grid."""
    m = np.maximum.accumulate(X.values)
    return GridPath(X.t0, X.dt, 2.0 * m - X.values)


def _normalize(weights: dict) -> dict:
    total = sum(weights.values())
    return {k: v / total for k, v in weights.items()}


def conditioned_walk_law(p_up: float, n_steps: int, tol: float = 1e-6) -> dict:
    """Endpoint pmf at step n of the +-1 walk conditioned to stay >= 0 forever.

    The infinite-horizon conditioning is truncated at n_steps + pad with pad
    doubled until the conditioning probability moves by less than tol; the
    positive drift makes that convergence geometric.
    """
    if p_up <= 0.5 or p_up >= 1.0:
        raise ValueError("conditioning degenerates unless 1/2 < p_up < 1")
    q = 1.0 - p_up

    def survival(pad):
        # psi[x] = P(stay >= 0 for pad more steps | at x); psi = 1 for x >= pad
        width = n_steps + pad + 2
        psi = np.ones(width + 1)
        for _ in range(pad):
            nxt = np.empty_like(psi)
            nxt[0] = p_up * psi[1]
            nxt[1:width] = p_up * psi[2:width + 1] + q * psi[0:width - 1]
            nxt[width] = 1.0
            psi = nxt
        return psi

    def forward():
        w = np.zeros(n_steps + 1)
        w[0] = 1.0
        for _ in range(n_steps):
            nxt = np.zeros_like(w)
            nxt[1:] += p_up * w[:-1]
            nxt[:-1] += q * w[1:]
            w = nxt
        return w

    w = forward()
    pad = 64
    prev_mass = None
    while True:
        psi = survival(pad)
        u = w * psi[:n_steps + 1]
        mass = u.sum()
        if prev_mass is not None and abs(mass - prev_mass) < tol * mass:
            break
        if pad > 1 << 14:
            raise RuntimeError("conditioning tail failed to converge")
        prev_mass = mass
        pad *= 2
    return _normalize({x: float(u[x]) for x in range(n_steps + 1) if u[x] > 0})


def conditioned_pm1_law(a: float, b: float, n_steps: int, tol: float = 1e-6) -> dict:
    """Endpoint pmf of the two-state chain's partial sums conditioned >= 0.

    State is (position, last step); the chain starts in state +1 and the
    first step already uses the (a, 1-a) row.
    """
    if not (0.0 < b < a < 1.0):
        raise ValueError("need 0 < b < a < 1")

    def survival(pad):
        width = n_steps + pad + 2
        up = np.ones(width + 1)    # psi(x, last=+1)
        dn = np.ones(width + 1)    # psi(x, last=-1)
        for _ in range(pad):
            nup = np.empty_like(up)
            ndn = np.empty_like(dn)
            nup[0] = a * up[1]
            nup[1:width] = a * up[2:width + 1] + (1 - a) * dn[0:width - 1]
            nup[width] = 1.0
            ndn[0] = (1 - b) * up[1]
            ndn[1:width] = (1 - b) * up[2:width + 1] + b * dn[0:width - 1]
            ndn[width] = 1.0
            up, dn = nup, ndn
        return up, dn

    w_up = np.zeros(n_steps + 1)
    w_dn = np.zeros(n_steps + 1)
    # one explicit first step from the initial +1 state
    if n_steps >= 1:
        w_up[1] = a
        # first step down lands at -1 < 0: killed
    else:
        w_up[0] = 1.0
    for _ in range(n_steps - 1):
        nu = np.zeros_like(w_up)
        nd = np.zeros_like(w_dn)
        nu[1:] += a * w_up[:-1]
        nd[:-1] += (1 - a) * w_up[1:]
        nu[1:] += (1 - b) * w_dn[:-1]
        nd[:-1] += b * w_dn[1:]
        w_up, w_dn = nu, nd
    pad = 64
    prev_mass = None
    while True:
        su, sd = survival(pad)
        u = w_up * su[:n_steps + 1] + w_dn * sd[:n_steps + 1]
        mass = u.sum()
        if prev_mass is not None and abs(mass - prev_mass) < tol * mass:
            break
        if pad > 1 << 14:
            raise RuntimeError("conditioning tail failed to converge")
        prev_mass = mass
        pad *= 2
    return _normalize({x: float(u[x]) for x in range(n_steps + 1) if u[x] > 0})


def _endpoint_pmf_from_samples(values: np.ndarray) -> dict:
    vals, counts = np.unique(values, return_counts=True)
    n = values.size
    return {int(v): c / n for v, c in zip(vals, counts)}


def discrete_pitman_check(p_up: float, n_steps: int, samples: int, rng,
                          theorem_id="discrete-pitman", threshold=0.01,
                          seed_info=None) -> TestReport:
    """TV between the MC law of (2M-X)_n for the drifted walk and the exact
    conditioned-walk endpoint law."""
    gen = as_generator(rng)
    steps = np.where(gen.random((samples, n_steps)) < p_up, 1, -1)
    x = np.cumsum(steps, axis=1)
    m = np.maximum(np.maximum.accumulate(x, axis=1)[:, -1], 0)
    v = 2 * m - x[:, -1]
    tv = tv_distance(_endpoint_pmf_from_samples(v), conditioned_walk_law(p_up, n_steps))
    return make_report(theorem_id, "tv-endpoint", tv, threshold, seed_info=seed_info)


def nonmarkov_pitman_check(a: float, b: float, n_steps: int, samples: int, rng,
                           theorem_id="nonmarkov-pitman", threshold=0.01,
                           seed_info=None) -> TestReport:
    """Same comparison for the two-state chain (no Markov property for X)."""
    gen = as_generator(rng)
    u = gen.random((samples, n_steps))
    state = np.ones(samples, dtype=np.int64)
    x = np.zeros(samples, dtype=np.int64)
    m = np.zeros(samples, dtype=np.int64)
    for k in range(n_steps):
        stay_up = (state == 1) & (u[:, k] < a)
        flip_up = (state == -1) & (u[:, k] >= b)
        state = np.where(stay_up | flip_up, 1, -1)
        x = x + state
        m = np.maximum(m, x)
    v = 2 * m - x
    tv = tv_distance(_endpoint_pmf_from_samples(v), conditioned_pm1_law(a, b, n_steps))
    return make_report(theorem_id, "tv-endpoint", tv, threshold, seed_info=seed_info)


# ---------------------------------------------------------------------------
# Brownian and log-integral queues on a grid with a pre-window
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OutputTheoremResult:
    """Transformed pair on the main window plus the queue trajectory."""

    D: GridPath
    T: GridPath
    q0: float
    q_values: np.ndarray
    truncated: bool


def _split_pre_main(A: GridPath, S: GridPath, horizon: float):
    if A.t0 >= 0.0:
        raise PathDomainError("need a pre-window: grid must start below 0")
    j0 = A.index_of(0.0)
    j1 = A.index_of(horizon)
    if j1 <= j0:
        raise PathDomainError("horizon must lie inside the grid")
    return j0, j1


def brownian_burke_transform(A: GridPath, S: GridPath, horizon: float) -> OutputTheoremResult:
    """Sup-reflection queue driven by A - S; outputs on [0, horizon].

    Q(t) = sup over s in [grid start, t] of (A-S)(t) - (A-S)(s); D and T are
    the transformed pair.  truncated flags a pre-window too short for the
    sup to have settled (the running min still sits at the grid start).
    """
    j0, j1 = _split_pre_main(A, S, horizon)
    x = A.values - S.values
    runmin = np.minimum.accumulate(x)
    q = x - runmin
    q_main = q[j0:j1 + 1]
    truncated = bool(np.any(runmin[j0:j1 + 1] == x[0]))
    a_main = A.values[j0:j1 + 1]
    s_main = S.values[j0:j1 + 1]
    d_vals = (a_main - a_main[0]) - (q_main - q_main[0])
    t_vals = (s_main - s_main[0]) + (q_main - q_main[0])
    return OutputTheoremResult(GridPath(0.0, A.dt, d_vals), GridPath(0.0, A.dt, t_vals),
                               float(q_main[0]), q_main, truncated)


def logexp_queue(A: GridPath, S: GridPath, horizon: float,
                 params: LogExpParams | None = None) -> OutputTheoremResult:
    """log-integral queue: Q(t) = log int_{start}^t exp[(A-S)(t) - (A-S)(s)] ds.

    Left-endpoint cells; the pre-window stands in for the infinite past and
    the truncation flag reports when its oldest cell still carries
    non-negligible weight (relative contribution above 1e-12).
    """
    if params is not None and params.dt != A.dt:
        raise PathDomainError("params.dt must match the grid")
    j0, j1 = _split_pre_main(A, S, horizon)
    x = A.values - S.values
    logdt = np.log(A.dt)
    # Q_j = x_j + log dt + log sum_{i <= j-1} exp(-x_i)
    lse = cum_logaddexp(-x[:-1])
    q = np.empty(x.size)
    q[0] = -np.inf
    q[1:] = x[1:] + logdt + lse
    q_main = q[j0:j1 + 1]
    oldest = -x[0] - lse[j1 - 1]
    truncated = bool(oldest > np.log(1e-12))
    a_main = A.values[j0:j1 + 1]
    s_main = S.values[j0:j1 + 1]
    d_vals = (a_main - a_main[0]) - (q_main - q_main[0])
    t_vals = (s_main - s_main[0]) + (q_main - q_main[0])
    return OutputTheoremResult(GridPath(0.0, A.dt, d_vals), GridPath(0.0, A.dt, t_vals),
                               float(q_main[0]), q_main, truncated)


def symmetry_residual(result: OutputTheoremResult, t: float, logexp: bool = False) -> tuple:
    """Residual of the time-reversed queue formula at an interior time.

    max-plus:  Q(t) = sup_{u>t} [D(t,u) - T(t,u)]
    log-int:   Q(t) = log int_{u>t} exp[D(t,u) - T(t,u)] du

    Returns (residual, truncated); the windowed right side can fall short of
    Q(t) when the remaining window is too small.
    """
    j = result.D.index_of(t)
    K = result.D.n_steps
    if j >= K:
        return float(result.q_values[j]), True
    dmt = result.D.values - result.T.values
    tail = dmt[j + 1:] - dmt[j]
    if logexp:
        rhs = float(cum_logaddexp(tail)[-1] + np.log(result.D.dt))
        argmax_at_edge = bool(np.argmax(tail) == tail.size - 1)
    else:
        rhs = max(0.0, float(tail.max()))
        argmax_at_edge = bool(np.argmax(tail) == tail.size - 1)
    residual = float(result.q_values[j] - rhs)
    return residual, argmax_at_edge


def matsumoto_yor_transform(X: GridPath):
    """(times, values) of 2M - X with 2M(t) = log int_0^t exp(2 X(s)) ds.

    The t = 0 point is omitted: the log-integral diverges to -inf there.
    """
    logdt = np.log(X.dt)
    two_m = cum_logaddexp(2.0 * X.values[:-1]) + logdt
    times = X.times()[1:]
    return times, two_m - X.values[1:]


# ---------------------------------------------------------------------------
# the n-path log-integral transform
# ---------------------------------------------------------------------------

def _le_sup_conv(fv, gv, logdt):
    # (f (o) g)(t) = g(t) + log int exp(f - g), closed grid sum
    return gv + logdt + cum_logaddexp(fv - gv)


def _le_inf_conv(fv, gv, logdt):
    # (f (x) g)(t) = g(t) - log int exp(g - f), closed grid sum
    return gv - logdt - cum_logaddexp(gv - fv)


def pi_n_transform(bundle: PathBundle, params: LogExpParams | None = None):
    """The n-path transform with sup replaced by the log-integral.

    Input: a GridPath bundle; output: list of value arrays on the same grid.
    Boundary values at the first index are +-log dt rather than 0 (the
    continuum transform is singular at t = 0); interior values converge to
    the continuum transform as dt -> 0.  The component sum equals the input
    sum exactly at every grid index.
    """
    if bundle.n < 2:
        raise PathDomainError("transform needs at least two paths")
    for c in bundle.components:
        if not isinstance(c, GridPath):
            raise PathDomainError("log-integral transform is defined on grid bundles")
    dt = bundle[0].dt
    if params is not None and params.dt != dt:
        raise PathDomainError("params.dt must match the grid")
    logdt = np.log(dt)
    cur = [c.values.copy() for c in bundle.components]
    out = []
    while len(cur) > 1:
        P = cur[0]
        nxt = []
        for f in cur[1:]:
            nxt.append(_le_sup_conv(f, P, logdt))
            P = _le_inf_conv(P, f, logdt)
        out.append(P)
        cur = nxt
    out.append(cur[0])
    return out


# ---------------------------------------------------------------------------
# autoregressive output and conditioning
# ---------------------------------------------------------------------------

def ar1_horizon(a: float, tail_var: float = 1e-12) -> int:
    """Series length m with truncated-tail variance below tail_var."""
    return int(np.ceil(np.log(tail_var * (1 - a * a)) / (2.0 * np.log(a)))) + 1


@dataclass(frozen=True)
class Ar1Result:
    X: np.ndarray        # stationary path, X[n] for n = 0..L-1
    hat_b: np.ndarray    # hat_b[n] = X[n] - a X[n+1], n = 0..L-2
    Y: np.ndarray | None  # conditioned recursion from Y[0] = x
    d: np.ndarray | None  # d[n] = Y[n] - a Y[n+1]


def ar1_forward(a: float, b: np.ndarray, x: float | None = None, rng=None) -> Ar1Result:
    """Stationary autoregressive path driven by b, plus its reversed residuals.

    X_0 = sum_{j>=0} a^j b_{-j} needs a pre-history: supplied by rng (tail
    truncated at variance 1e-12), or taken to be zero when rng is None
    (then X is only asymptotically stationary).  When x is given, the
    recursion Y_{n+1} = a Y_n + b_n from Y_0 = x and its residuals
    d_n = Y_n - a Y_{n+1} are returned as well.
    """
    if not 0.0 < a < 1.0:
        raise ValueError("need 0 < a < 1")
    b = np.asarray(b, dtype=np.float64)
    L = b.size
    if L < 2:
        raise ValueError("need at least two driving values")
    if rng is not None:
        m = ar1_horizon(a)
        hist = as_generator(rng).standard_normal(m)
        weights = a ** np.arange(1, m + 1)
        x0 = b[0] + float(weights @ hist)
    else:
        x0 = float(b[0])
    X = np.empty(L)
    X[0] = x0
    for n in range(L - 1):
        X[n + 1] = a * X[n] + b[n + 1]
    hat_b = X[:-1] - a * X[1:]
    Y = d = None
    if x is not None:
        Y = np.empty(L + 1)
        Y[0] = x
        for n in range(L):
            Y[n + 1] = a * Y[n] + b[n]
        d = Y[:-1] - a * Y[1:]
    return Ar1Result(X, hat_b, Y, d)


def ar1_output_check(a: float, length: int, samples: int, rng,
                     theorem_id="ar1-output", alpha=0.01, seed_info=None) -> list[TestReport]:
    """Reversed residuals are iid standard normal: per-coordinate KS plus
    pairwise correlation bounds."""
    gen = as_generator(rng)
    m = ar1_horizon(a)
    hist = gen.standard_normal((samples, m))
    b = gen.standard_normal((samples, length + 1))
    weights = a ** np.arange(1, m + 1)
    X = np.empty((samples, length + 1))
    X[:, 0] = b[:, 0] + hist @ weights
    for n in range(length):
        X[:, n + 1] = a * X[:, n] + b[:, n + 1]
    hat_b = X[:, :-1] - a * X[:, 1:]
    reports = []
    for i in range(length):
        reports.append(ks_one_sample(hat_b[:, i], normal_cdf, theorem_id,
                                     f"hat-b-{i}-normal-ks", alpha, seed_info))
    for i in range(length):
        for j in range(i + 1, length):
            reports.append(corr_bound(hat_b[:, i], hat_b[:, j], theorem_id,
                                      f"hat-b-corr-{i}-{j}", seed_info=seed_info))
    return reports


def ar1_conditional_targets(a: float, x: float, k: int):
    """Exact Gaussian law of (b_0..b_k) given sum a^n b_n = x:
    mean_i = a^i (1 - a^2) x, covariance I - (1-a^2) w w^T with w_i = a^i."""
    w = a ** np.arange(k + 1)
    mean = (1.0 - a * a) * x * w
    cov = np.eye(k + 1) - (1.0 - a * a) * np.outer(w, w)
    return mean, cov


def ar1_conditional_check(a: float, x: float, k: int, samples: int, rng,
                          theorem_id="ar1-conditional", alpha=0.01,
                          band_factor=3.0, seed_info=None) -> list[TestReport]:
    """MC law of (d_0..d_k) against the exact Gaussian conditional law."""
    gen = as_generator(rng)
    b = gen.standard_normal((samples, k + 1))
    Y = np.full(samples, float(x))
    d = np.empty((samples, k + 1))
    for n in range(k + 1):
        Y_next = a * Y + b[:, n]
        d[:, n] = Y - a * Y_next
        Y = Y_next
    mean, cov = ar1_conditional_targets(a, x, k)
    reports = []
    root_n = np.sqrt(samples)
    for i in range(k + 1):
        sd_i = np.sqrt(cov[i, i])
        err = abs(d[:, i].mean() - mean[i])
        reports.append(make_report(theorem_id, f"d-{i}-mean", err,
                                   band_factor * sd_i / root_n, seed_info=seed_info))
        z = (d[:, i] - mean[i]) / sd_i
        reports.append(ks_one_sample(z, normal_cdf, theorem_id,
                                     f"d-{i}-normal-ks", alpha, seed_info))
    dc = d - d.mean(axis=0)
    sample_cov = dc.T @ dc / (samples - 1)
    for i in range(k + 1):
        for j in range(i, k + 1):
            se = np.sqrt((cov[i, i] * cov[j, j] + cov[i, j] ** 2) / samples)
            err = abs(sample_cov[i, j] - cov[i, j])
            reports.append(make_report(theorem_id, f"d-cov-{i}-{j}", err,
                                       band_factor * se, seed_info=seed_info))
    return reports
