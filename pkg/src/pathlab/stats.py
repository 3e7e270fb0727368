"""Statistical tests that turn distributional identities into pass/fail.

Kolmogorov-Smirnov (one- and two-sample, exact small-n option), Pearson
chi-square with a self-contained regularized incomplete gamma, total
variation distance and correlation bounds.  Every check produces a
:class:`TestReport`.

Pass rule: when a p-value exists the check passes iff p >= threshold
(threshold is the test level alpha); otherwise it passes iff
|value| <= threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass
class TestReport:
    """Outcome of one named check against one theorem id."""

    theorem_id: str
    statistic_name: str
    value: float
    p_value: float | None
    threshold: float
    passed: bool
    truncation_flag: bool = False
    seed_info: dict = field(default_factory=dict)
    note: str = ""

    def to_dict(self) -> dict:
        def clean(x):
            if x is None:
                return None
            x = float(x)
            return None if math.isnan(x) else x

        return {
            "theorem_id": self.theorem_id,
            "statistic_name": self.statistic_name,
            "value": clean(self.value),
            "p_value": clean(self.p_value),
            "threshold": float(self.threshold),
            "passed": bool(self.passed),
            "truncation_flag": bool(self.truncation_flag),
            "seed_info": self.seed_info,
            "note": self.note,
        }


def make_report(theorem_id, name, value, threshold, p_value=None,
                truncation_flag=False, seed_info=None, note="") -> TestReport:
    """Build a report applying the uniform pass rule."""
    if p_value is not None:
        passed = bool(p_value >= threshold)
    else:
        passed = bool(abs(value) <= threshold) and not math.isnan(value)
    return TestReport(theorem_id, name, float(value), p_value, float(threshold),
                      passed, truncation_flag, seed_info or {}, note)


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov
# ---------------------------------------------------------------------------

def kolmogorov_sf(y: float) -> float:
    """Asymptotic survival function of the KS statistic, Q(y) = 2 sum (-1)^{r-1} e^{-2 r^2 y^2}."""
    if y < 1e-10:
        return 1.0
    total = 0.0
    sign = 1.0
    for r in range(1, 200):
        term = math.exp(-2.0 * r * r * y * y)
        total += sign * term
        if term < 1e-18:
            break
        sign = -sign
    return min(1.0, max(0.0, 2.0 * total))


def ks_exact_cdf(n: int, d: float) -> float:
    """Exact P(D_n < d) for the one-sample statistic (matrix method)."""
    if d <= 0.0:
        return 0.0
    if d >= 1.0:
        return 1.0
    k = int(math.ceil(n * d))
    h = k - n * d
    m = 2 * k - 1
    H = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            if i - j + 1 >= 0:
                H[i, j] = 1.0
    for i in range(m):
        H[i, 0] -= h ** (i + 1)
        H[m - 1, i] -= h ** (m - i)
    if 2.0 * h - 1.0 > 0.0:
        H[m - 1, 0] += (2.0 * h - 1.0) ** m
    for i in range(m):
        for j in range(m):
            if i - j + 1 > 0:
                for g in range(1, i - j + 2):
                    H[i, j] /= g
    def mat_power(nn):
        # H^nn with decimal rescaling of the tracked center element
        if nn == 1:
            return H.copy(), 0
        half, e = mat_power(nn // 2)
        out = half @ half
        expo = 2 * e
        if out[k - 1, k - 1] > 1e140:
            out /= 1e140
            expo += 140
        if nn % 2:
            out = out @ H
            if out[k - 1, k - 1] > 1e140:
                out /= 1e140
                expo += 140
        return out, expo

    Hn, expo = mat_power(n)
    t = Hn[k - 1, k - 1]
    for i in range(1, n + 1):
        t *= i / n
        if t < 1e-140:
            t *= 1e140
            expo -= 140
    return max(0.0, min(1.0, t * 10.0 ** expo))


def _ecdf_distance(data: np.ndarray, cdf) -> float:
    x = np.sort(np.asarray(data, dtype=np.float64))
    n = x.size
    c = np.asarray(cdf(x), dtype=np.float64)
    up = np.arange(1, n + 1) / n - c
    dn = c - np.arange(0, n) / n
    return float(max(up.max(), dn.max()))


def ks_one_sample(data, cdf, theorem_id="", name="ks", alpha=0.01,
                  seed_info=None) -> TestReport:
    """One-sample KS against a callable cdf; exact p for n <= 30."""
    data = np.asarray(data, dtype=np.float64)
    n = data.size
    if n == 0:
        return make_report(theorem_id, name, float("nan"), alpha, p_value=0.0,
                           seed_info=seed_info, note="insufficient data")
    d = _ecdf_distance(data, cdf)
    if n <= 30:
        p = 1.0 - ks_exact_cdf(n, d)
    else:
        en = math.sqrt(n)
        p = kolmogorov_sf((en + 0.12 + 0.11 / en) * d)
    return make_report(theorem_id, name, d, alpha, p_value=p, seed_info=seed_info)


def ks_two_sample(a, b, theorem_id="", name="ks2", alpha=0.01,
                  seed_info=None) -> TestReport:
    """Two-sample KS with the asymptotic p-value."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    n1, n2 = a.size, b.size
    if n1 == 0 or n2 == 0:
        return make_report(theorem_id, name, float("nan"), alpha, p_value=0.0,
                           seed_info=seed_info, note="insufficient data")
    both = np.concatenate([a, b])
    c1 = np.searchsorted(a, both, side="right") / n1
    c2 = np.searchsorted(b, both, side="right") / n2
    d = float(np.max(np.abs(c1 - c2)))
    en = math.sqrt(n1 * n2 / (n1 + n2))
    p = kolmogorov_sf((en + 0.12 + 0.11 / en) * d)
    return make_report(theorem_id, name, d, alpha, p_value=p, seed_info=seed_info)


# ---------------------------------------------------------------------------
# regularized incomplete gamma and chi-square
# ---------------------------------------------------------------------------

_ITMAX = 800
_GEPS = 1e-15


def _gamma_series(a: float, x: float) -> float:
    # P(a, x) by series, valid for x < a + 1
    ap = a
    summ = 1.0 / a
    delt = summ
    for _ in range(_ITMAX):
        ap += 1.0
        delt *= x / ap
        summ += delt
        if abs(delt) < abs(summ) * _GEPS:
            break
    return summ * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_contfrac(a: float, x: float) -> float:
    # Q(a, x) by modified-Lentz continued fraction, valid for x >= a + 1
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _ITMAX):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delt = d * c
        h *= delt
        if abs(delt - 1.0) < _GEPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def gammainc_lower(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x)."""
    if x < 0 or a <= 0:
        raise ValueError("need x >= 0 and a > 0")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return _gamma_series(a, x)
    return 1.0 - _gamma_contfrac(a, x)


def gammainc_upper(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x)."""
    if x < 0 or a <= 0:
        raise ValueError("need x >= 0 and a > 0")
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x)
    return _gamma_contfrac(a, x)


def chi2_sf(x: float, df: int) -> float:
    """Chi-square survival function."""
    return gammainc_upper(df / 2.0, x / 2.0)


def chi_square_gof(counts, probs, theorem_id="", name="chi2", alpha=0.01,
                   min_expected=5.0, seed_info=None) -> TestReport:
    """Pearson goodness of fit; bins with expected < min_expected are merged.

    probs must cover the whole partition (sum to 1 within 1e-6); give the
    truncated remainder its own bin.
    """
    counts = np.asarray(counts, dtype=np.float64)
    probs = np.asarray(probs, dtype=np.float64)
    if counts.size == 0 or counts.sum() == 0:
        return make_report(theorem_id, name, float("nan"), alpha, p_value=0.0,
                           seed_info=seed_info, note="insufficient data")
    if abs(probs.sum() - 1.0) > 1e-6:
        raise ValueError("probs must sum to 1; add an explicit tail bin")
    total = counts.sum()
    merged_c, merged_p = [], []
    acc_c = acc_p = 0.0
    for c, p in zip(counts, probs):
        acc_c += c
        acc_p += p
        if acc_p * total >= min_expected:
            merged_c.append(acc_c)
            merged_p.append(acc_p)
            acc_c = acc_p = 0.0
    if acc_p > 0 or acc_c > 0:
        if merged_c:
            merged_c[-1] += acc_c
            merged_p[-1] += acc_p
        else:
            merged_c.append(acc_c)
            merged_p.append(acc_p)
    mc = np.asarray(merged_c)
    mp = np.asarray(merged_p)
    expected = total * mp
    stat = float(np.sum((mc - expected) ** 2 / expected))
    df = mc.size - 1
    if df < 1:
        return make_report(theorem_id, name, float("nan"), alpha, p_value=0.0,
                           seed_info=seed_info, note="fewer than two usable bins")
    p = chi2_sf(stat, df)
    return make_report(theorem_id, name, stat, alpha, p_value=p,
                       seed_info=seed_info, note=f"df={df}")


# ---------------------------------------------------------------------------
# total variation and correlation
# ---------------------------------------------------------------------------

def tv_distance(pmf_a, pmf_b) -> float:
    """Half L1 distance between two pmfs given as mappings key -> mass."""
    keys = set(pmf_a) | set(pmf_b)
    return 0.5 * sum(abs(pmf_a.get(k, 0.0) - pmf_b.get(k, 0.0)) for k in keys)


def corr_bound(a, b, theorem_id="", name="corr", band_factor=3.0,
               seed_info=None) -> TestReport:
    """Sample correlation with the +-band_factor/sqrt(n) acceptance band."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n = a.size
    if n < 2:
        return make_report(theorem_id, name, float("nan"), 0.0, seed_info=seed_info,
                           note="insufficient data")
    sa, sb = a.std(), b.std()
    if sa == 0.0 or sb == 0.0:
        return make_report(theorem_id, name, float("nan"), band_factor / math.sqrt(n),
                           seed_info=seed_info, note="undefined: constant input")
    r = float(np.mean((a - a.mean()) * (b - b.mean())) / (sa * sb))
    return make_report(theorem_id, name, r, band_factor / math.sqrt(n),
                       seed_info=seed_info)


def normal_cdf(x):
    """Standard normal cdf, vectorised, double precision via erfc."""
    arr = np.asarray(x, dtype=np.float64)
    flat = arr.ravel()
    out = np.empty_like(flat)
    for i, v in enumerate(flat):
        out[i] = 0.5 * math.erfc(-v / math.sqrt(2.0))
    out = out.reshape(arr.shape)
    return float(out) if arr.ndim == 0 else out
