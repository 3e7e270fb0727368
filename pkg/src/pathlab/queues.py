"""Stationary M/M/1 queues and tandems built from counting paths.

Construction on a finite window [t_lo, t_hi]: the initial queue length is
drawn geometric(arrival rate / service rate) so the windowed process is
exactly the restriction of the doubly-infinite stationary queue (product
form makes stage initial lengths independent); no burn-in is needed.  Events
then evolve one at a time: an arrival raises the length, a service epoch
departs a customer when the queue is busy and is otherwise unused.  When an
arrival and a service epoch collide in float time (never, almost surely) the
service is processed first, keeping runs reproducible.

Derived processes per stage: departures D, unused service U = S - D, and
T = A + U.  The tandem form T_k = S_k - Q_k(s) + Q_k(t) agrees with A + U
stage by stage; the test suite asserts that agreement.

Functionals whose defining sup ranges over an unbounded horizon carry a
truncation flag reporting whether the windowed sup already attained the
exact value (residual 0) or hit the window boundary.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ._kernels.events import queue_walk
from .paths import PathBundle, PathDomainError, StepPath, chain_inf, gamma2, sup_conv
from .sampling import as_generator
from .stats import TestReport, corr_bound, ks_one_sample, make_report


class StabilityError(ValueError):
    """Arrival rate must stay below every service rate."""


@dataclass(frozen=True)
class QueueRecord:
    """One stage: inputs (A, S), outputs (D, T, U) and the initial length q0."""

    A: StepPath
    S: StepPath
    D: StepPath
    T: StepPath
    U: StepPath
    q0: int

    def queue_length(self, t):
        """Q(t) = q0 + A(t) - D(t)."""
        return self.q0 + self.A.value(t) - self.D.value(t)

    @property
    def window(self):
        return self.A.window


@dataclass(frozen=True)
class TandemRecord:
    """Stages in series; stage k is driven by the departures of stage k-1."""

    A: StepPath
    stages: tuple

    @property
    def n_stages(self) -> int:
        return len(self.stages)

    @property
    def final_departures(self) -> StepPath:
        return self.stages[-1].D

    def initial_queues(self):
        return [st.q0 for st in self.stages]

    def to_event_csv(self, path) -> None:
        rows = [(t, 0, "arrival") for t in self.A.jump_times]
        for k, st in enumerate(self.stages, start=1):
            rows += [(t, k, "departure") for t in st.D.jump_times]
            rows += [(t, k, "unused") for t in st.U.jump_times]
        rows.sort()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time", "stage", "event_type"])
            for t, k, kind in rows:
                w.writerow([repr(float(t)), k, kind])


def _require_unit_counting(p: StepPath, what: str):
    if p.n_jumps and not np.all(p.jump_sizes == 1.0):
        raise PathDomainError(f"{what} must be a unit-jump counting path")


def build_stationary_queue(A: StepPath, S: StepPath, lam: float, mu: float,
                           rng, q0: int | None = None) -> QueueRecord:
    """Single stationary stage.

    q0 defaults to a geometric(lam/mu) draw, P(q0 = k) = (1-rho) rho^k; pass
    an explicit q0 to condition on an initial length (e.g. 0 for the
    empty-start identities).
    """
    if not lam < mu:
        raise StabilityError(f"need lam < mu, got lam={lam}, mu={mu}")
    if A.window != S.window:
        raise PathDomainError("arrival and service paths live on different windows")
    _require_unit_counting(A, "arrivals")
    _require_unit_counting(S, "services")
    if q0 is None:
        rho = lam / mu
        q0 = int(as_generator(rng).geometric(1.0 - rho) - 1)
    if q0 < 0:
        raise ValueError("q0 must be nonnegative")

    times = np.concatenate([A.jump_times, S.jump_times])
    is_service = np.concatenate([np.zeros(A.n_jumps, dtype=bool),
                                 np.ones(S.n_jumps, dtype=bool)])
    # service first on float ties: sort by (time, service=0 < arrival=1)
    order = np.lexsort((~is_service, times))
    times = times[order]
    is_service = is_service[order]

    dep_flags, _ = queue_walk(is_service, q0)
    d_times = times[dep_flags]
    u_times = times[is_service & ~dep_flags]
    window = A.window
    D = StepPath(d_times, np.ones(d_times.size), window)
    U = StepPath(u_times, np.ones(u_times.size), window)
    t_times = np.sort(np.concatenate([A.jump_times, u_times]))
    T = StepPath(t_times, np.ones(t_times.size), window)
    return QueueRecord(A, S, D, T, U, q0)


def build_tandem(A: StepPath, services, lam: float, mus, rng,
                 initial_queues=None) -> TandemRecord:
    """Tandem of stages; stage k consumes the departures of stage k-1."""
    mus = list(mus)
    services = list(services)
    if len(services) != len(mus):
        raise ValueError("one service path per rate")
    if not lam < min(mus):
        raise StabilityError(f"need lam < min(mu), got lam={lam}, mus={mus}")
    if initial_queues is None:
        initial_queues = [None] * len(mus)
    stages = []
    feed = A
    for S_k, mu_k, q0_k in zip(services, mus, initial_queues):
        rec = build_stationary_queue(feed, S_k, lam, mu_k, rng, q0=q0_k)
        stages.append(rec)
        feed = rec.D
    return TandemRecord(A, tuple(stages))


# ---------------------------------------------------------------------------
# law checks
# ---------------------------------------------------------------------------

def departures_law_check(record: QueueRecord, lam: float, mu: float,
                         theorem_id: str = "burke-mm1", alpha: float = 0.01,
                         n_bins: int = 200, seed_info=None) -> list[TestReport]:
    """Output-theorem diagnostics on one long stationary window.

    KS of inter-departure gaps against Exponential(lam) and of T-gaps against
    Exponential(mu); independence of D and T via binned-count correlation;
    quasi-reversibility via correlation of past D-counts with the queue
    length at the bin ends.
    """
    reports = []
    t_lo, t_hi = record.window
    d_times = record.D.jump_times
    t_times = record.T.jump_times
    if d_times.size < 2 or t_times.size < 2:
        return [make_report(theorem_id, "departure-gaps-ks", float("nan"), alpha,
                            p_value=0.0, seed_info=seed_info, note="insufficient data")]
    reports.append(ks_one_sample(np.diff(d_times), lambda x: 1.0 - np.exp(-lam * x),
                                 theorem_id, "departure-gaps-ks", alpha, seed_info))
    reports.append(ks_one_sample(np.diff(t_times), lambda x: 1.0 - np.exp(-mu * x),
                                 theorem_id, "t-gaps-ks", alpha, seed_info))
    edges = np.linspace(t_lo, t_hi, n_bins + 1)
    d_counts = np.diff(np.searchsorted(d_times, edges, side="right"))
    t_counts = np.diff(np.searchsorted(t_times, edges, side="right"))
    reports.append(corr_bound(d_counts, t_counts, theorem_id, "d-t-count-corr",
                              seed_info=seed_info))
    q_at_ends = np.asarray([record.queue_length(t) for t in edges[1:]])
    reports.append(corr_bound(d_counts, q_at_ends, theorem_id,
                              "past-departures-vs-queue-corr", seed_info=seed_info))
    return reports


def future_formula_check(record: QueueRecord, t: float):
    """Residual of Q(t) = sup_{u>t} [D(t,u) - T(t,u)] over the remaining window.

    Returns (residual, truncated).  The windowed sup can only fall short of
    Q(t), so residual >= 0; truncated reports a boundary-limited sup.
    """
    _, t_hi = record.window
    q_t = record.queue_length(t)
    d_after = record.D.jump_times[record.D.jump_times > t]
    t_after = record.T.jump_times[record.T.jump_times > t]
    times = np.concatenate([d_after, t_after])
    if times.size == 0:
        return float(q_t), True
    signs = np.concatenate([np.ones(d_after.size), -np.ones(t_after.size)])
    order = np.argsort(times, kind="stable")
    series = np.cumsum(signs[order])
    rhs = max(0.0, float(series.max()))
    argmax_last = bool(series.argmax() == series.size - 1)
    residual = float(q_t - rhs)
    return residual, bool(residual != 0.0 or argmax_last)


def queue_sum_formula_check(tandem: TandemRecord):
    """Both window forms of the queue-sum identity.

    forward: sum_k Q_k(start) = sup_{t>start}[D_n(t) - (T_1 (x) ... (x) T_n)(t)]
    reversed: sum_k Q_k(end) = sup_{s>0}[rev A(s) - (rev S_1 (x) ... (x) rev S_n)(s)]

    Returns dict with residuals (lhs - windowed sup, always >= 0) and
    truncation flags.
    """
    t_lo, t_hi = tandem.A.window

    def sup_diff(f: StepPath, g: StepPath):
        times = np.concatenate([f.jump_times, g.jump_times])
        sizes = np.concatenate([f.jump_sizes, -g.jump_sizes])
        if times.size == 0:
            return 0.0, False
        order = np.argsort(times, kind="stable")
        series = np.cumsum(sizes[order])
        best = max(0.0, float(series.max()))
        return best, bool(series.argmax() == series.size - 1)

    chain_T = chain_inf(PathBundle(tuple(st.T for st in tandem.stages)))
    rhs_fwd, at_edge_fwd = sup_diff(tandem.final_departures, chain_T)
    lhs_fwd = float(sum(tandem.initial_queues()))
    res_fwd = lhs_fwd - rhs_fwd

    rev_A = tandem.A.reversed()
    rev_S = PathBundle(tuple(st.S.reversed() for st in tandem.stages))
    rhs_rev, at_edge_rev = sup_diff(rev_A, chain_inf(rev_S))
    lhs_rev = float(sum(st.queue_length(t_hi) for st in tandem.stages))
    res_rev = lhs_rev - rhs_rev

    return {
        "forward_residual": res_fwd,
        "forward_truncated": bool(res_fwd != 0.0 or at_edge_fwd),
        "reversed_residual": res_rev,
        "reversed_truncated": bool(res_rev != 0.0 or at_edge_rev),
    }


def mass_conservation_max_error(tandem: TandemRecord) -> float:
    """Max over stages k and event times of
    |D_k(t) + sum_{i<=k} Q_i(t) - A(t) - sum_{i<=k} Q_i(start)|; exact 0."""
    worst = 0.0
    all_times = np.unique(np.concatenate(
        [tandem.A.jump_times] + [st.S.jump_times for st in tandem.stages]))
    if all_times.size == 0:
        return 0.0
    a_vals = tandem.A.value(all_times)
    q_sum = np.zeros(all_times.size)
    q0_sum = 0.0
    for st in tandem.stages:
        q_vals = st.q0 + st.A.value(all_times) - st.D.value(all_times)
        q_sum = q_sum + q_vals
        q0_sum += st.q0
        d_vals = st.D.value(all_times)
        err = np.max(np.abs(d_vals + q_sum - a_vals - q0_sum))
        worst = max(worst, float(err))
    return worst


def zero_queue_identities_check(tandem: TandemRecord, theorem_id="zero-queue-identities",
                                seed_info=None) -> list[TestReport]:
    """Empty-start identities, exact:

    D_n = A (x) S_1 (x) ... (x) S_n  and  T_k = S_k (o) (A (x) S_1 ... (x) S_{k-1}).

    Only asserted when every stage starts empty; otherwise reported as
    skipped (the identities are conditional on that event).
    """
    if any(q != 0 for q in tandem.initial_queues()):
        return [make_report(theorem_id, "skipped", 0.0, 0.0, seed_info=seed_info,
                            note="initial queues occupied; identity not asserted")]
    reports = []
    chain = tandem.A
    for k, st in enumerate(tandem.stages, start=1):
        t_pred = sup_conv(st.S, chain)
        chain = chain_inf(PathBundle((chain, st.S)))
        probe = np.unique(np.concatenate([chain.jump_times, st.D.jump_times,
                                          t_pred.jump_times, st.T.jump_times,
                                          [tandem.A.window[1]]]))
        d_err = float(np.max(np.abs(st.D.value(probe) - chain.value(probe)))) if probe.size else 0.0
        t_err = float(np.max(np.abs(st.T.value(probe) - t_pred.value(probe)))) if probe.size else 0.0
        reports.append(make_report(theorem_id, f"departures-chain-stage-{k}", d_err, 0.0,
                                   seed_info=seed_info))
        reports.append(make_report(theorem_id, f"t-process-chain-stage-{k}", t_err, 0.0,
                                   seed_info=seed_info))
    return reports


def gamma2_restriction_error(record: QueueRecord) -> float:
    """On an empty start, (D, T) equals the two-path transform of (A, S); exact."""
    if record.q0 != 0:
        raise ValueError("restriction identity is conditional on an empty start")
    pair = gamma2(record.A, record.S)
    probe = np.unique(np.concatenate([record.A.jump_times, record.S.jump_times,
                                      [record.window[1]]]))
    if probe.size == 0:
        return 0.0
    d_err = np.max(np.abs(record.D.value(probe) - pair[0].value(probe)))
    t_err = np.max(np.abs(record.T.value(probe) - pair[1].value(probe)))
    return float(max(d_err, t_err))
