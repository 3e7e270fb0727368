"""Path types and the min-plus / max-plus convolution algebra.

Two representations cover everything downstream:

* :class:`StepPath` - cadlag piecewise-constant paths (counting processes),
  kept exactly as jump epochs and sizes.  Operator inf/sup values on these
  paths sit either at an event epoch or at a left limit; a left limit equals
  the value at the previous epoch, so a single ordered pass over the merged
  events evaluates the convolutions exactly.
* :class:`GridPath` - paths sampled on a uniform grid (Brownian-type input).
  Operators optimise over grid points only; no interpolation happens inside
  the algebra, the discretisation error is owned by the experiment's dt.

Both kinds start at value 0 at the window origin, matching the counting
convention value(start) = 0.

The transform ``gamma_n`` is the recursion

    G_k(f_1..f_k) = (f_1 (x) ... (x) f_k,
                     G_{k-1}(f_2 (o) f_1, f_3 (o) (f_1 (x) f_2), ...))

with (x) the inf-convolution, (o) the sup-convolution, folded strictly left
to right.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ._kernels.events import merge_event_values, step_conv_values
from ._kernels.grid import chain_inf_batch, gamma_endpoints_batch  # noqa: F401 (re-export for MC users)


class PathDomainError(ValueError):
    """Operands live on different windows/grids, or a precondition fails."""


# ---------------------------------------------------------------------------
# path types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepPath:
    """Piecewise-constant cadlag path: value(t) = sum of jump sizes <= t.

    Jump times are strictly increasing and lie in (t_lo, t_hi]; the value at
    the window start is 0 by convention.
    """

    jump_times: np.ndarray
    jump_sizes: np.ndarray
    window: tuple

    def __post_init__(self):
        jt = np.asarray(self.jump_times, dtype=np.float64)
        js = np.asarray(self.jump_sizes, dtype=np.float64)
        object.__setattr__(self, "jump_times", jt)
        object.__setattr__(self, "jump_sizes", js)
        t_lo, t_hi = self.window
        if not t_lo < t_hi and not (t_lo == t_hi and jt.size == 0):
            raise PathDomainError("window must satisfy t_lo <= t_hi")
        if jt.shape != js.shape or jt.ndim != 1:
            raise PathDomainError("jump_times and jump_sizes must be equal-length 1-d arrays")
        if jt.size:
            if np.any(np.diff(jt) <= 0):
                raise PathDomainError("jump times must be strictly increasing")
            if jt[0] <= t_lo or jt[-1] > t_hi:
                raise PathDomainError("jump times must lie in (t_lo, t_hi]")
        if not np.all(np.isfinite(js)):
            raise PathDomainError("jump sizes must be finite")

    @property
    def n_jumps(self) -> int:
        return int(self.jump_times.size)

    def value(self, t):
        """Right-continuous value at time(s) t."""
        t = np.asarray(t, dtype=np.float64)
        cum = np.concatenate(([0.0], np.cumsum(self.jump_sizes)))
        idx = np.searchsorted(self.jump_times, t, side="right")
        out = cum[idx]
        return float(out) if out.ndim == 0 else out

    def left_value(self, t):
        """Left limit at time(s) t."""
        t = np.asarray(t, dtype=np.float64)
        cum = np.concatenate(([0.0], np.cumsum(self.jump_sizes)))
        idx = np.searchsorted(self.jump_times, t, side="left")
        out = cum[idx]
        return float(out) if out.ndim == 0 else out

    def increment(self, s, t):
        """Measure of (s, t]."""
        return self.value(t) - self.value(s)

    @property
    def end_value(self) -> float:
        return float(np.sum(self.jump_sizes))

    def reversed(self) -> "StepPath":
        """Time reversal about the window end: counts (t_hi - s, t_hi]."""
        t_lo, t_hi = self.window
        times = t_hi - self.jump_times[::-1]
        if times.size and times[0] == 0.0:
            raise PathDomainError("cannot reverse a path with a jump at the window end")
        return StepPath(times, self.jump_sizes[::-1].copy(), (0.0, t_hi - t_lo))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["jump_time", "jump_size"])
            for t, s in zip(self.jump_times, self.jump_sizes):
                w.writerow([repr(float(t)), repr(float(s))])

    @classmethod
    def from_csv(cls, path, window=None) -> "StepPath":
        times, sizes = [], []
        with open(path, newline="") as fh:
            r = csv.reader(fh)
            header = next(r)
            if header != ["jump_time", "jump_size"]:
                raise PathDomainError("expected header jump_time,jump_size")
            for row in r:
                times.append(float(row[0]))
                sizes.append(float(row[1]))
        times = np.asarray(times)
        sizes = np.asarray(sizes)
        if window is None:
            window = (0.0, float(times[-1]) if times.size else 0.0)
        return cls(times, sizes, window)


@dataclass(frozen=True)
class GridPath:
    """Path sampled on the uniform grid t0 + k*dt, k = 0..K, values[0] = 0."""

    t0: float
    dt: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if self.dt <= 0:
            raise PathDomainError("dt must be positive")
        if v.ndim != 1 or v.size < 1:
            raise PathDomainError("values must be a nonempty 1-d array")
        if v[0] != 0.0:
            raise PathDomainError("values[0] must be 0")
        if not np.all(np.isfinite(v)):
            raise PathDomainError("values must be finite")

    @property
    def n_steps(self) -> int:
        return int(self.values.size - 1)

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.size)

    def index_of(self, t: float) -> int:
        j = round((t - self.t0) / self.dt)
        if j < 0 or j > self.n_steps or abs(self.t0 + j * self.dt - t) > 1e-9 * max(self.dt, 1.0):
            raise PathDomainError(f"time {t} is not a grid point")
        return int(j)

    def value(self, t: float) -> float:
        return float(self.values[self.index_of(t)])

    def increments(self) -> np.ndarray:
        return np.diff(self.values)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "value"])
            for t, v in zip(self.times(), self.values):
                w.writerow([repr(float(t)), repr(float(v))])

    @classmethod
    def from_csv(cls, path) -> "GridPath":
        ts, vs = [], []
        with open(path, newline="") as fh:
            r = csv.reader(fh)
            header = next(r)
            if header != ["t", "value"]:
                raise PathDomainError("expected header t,value")
            for row in r:
                ts.append(float(row[0]))
                vs.append(float(row[1]))
        ts = np.asarray(ts)
        if ts.size < 2:
            raise PathDomainError("grid needs at least two points")
        steps = np.diff(ts)
        dt = steps[0]
        if np.any(np.abs(steps - dt) > 1e-9 * max(abs(dt), 1.0)):
            raise PathDomainError("grid spacing is not uniform")
        return cls(float(ts[0]), float(dt), np.asarray(vs))


@dataclass(frozen=True)
class PathBundle:
    """Ordered components over a common window (StepPath) or grid (GridPath)."""

    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if len(comps) < 1:
            raise PathDomainError("bundle needs at least one path")
        first = comps[0]
        if isinstance(first, GridPath):
            for c in comps[1:]:
                _check_same_grid(first, c)
        elif isinstance(first, StepPath):
            for c in comps[1:]:
                _check_same_window(first, c)
        else:
            raise PathDomainError("bundle components must be StepPath or GridPath")

    def __len__(self):
        return len(self.components)

    def __getitem__(self, i):
        return self.components[i]

    @property
    def n(self) -> int:
        return len(self.components)

    def reversed(self) -> "PathBundle":
        return PathBundle(tuple(self.components[::-1]))


def _check_same_grid(a, b):
    if not isinstance(b, GridPath):
        raise PathDomainError("mixed path kinds in one operation")
    if a.t0 != b.t0 or a.dt != b.dt or a.values.size != b.values.size:
        raise PathDomainError("paths live on different grids")


def _check_same_window(a, b):
    if not isinstance(b, StepPath):
        raise PathDomainError("mixed path kinds in one operation")
    if a.window != b.window:
        raise PathDomainError("paths live on different windows")


# ---------------------------------------------------------------------------
# the two convolutions
# ---------------------------------------------------------------------------

def _grid_conv(f: GridPath, g: GridPath, sign: int) -> GridPath:
    _check_same_grid(f, g)
    d = sign * (f.values - g.values)
    best = np.maximum.accumulate(d)
    return GridPath(f.t0, f.dt, g.values + sign * best)


def _step_conv(f: StepPath, g: StepPath, sign: int) -> StepPath:
    _check_same_window(f, g)
    merged, fv, gv = merge_event_values(f.jump_times, f.jump_sizes,
                                        g.jump_times, g.jump_sizes)
    out_vals = step_conv_values(fv, gv, sign)
    jumps = np.diff(np.concatenate(([0.0], out_vals)))
    keep = jumps != 0.0
    return StepPath(merged[keep], jumps[keep], f.window)


def inf_conv(f, g):
    """(f (x) g)(t) = inf over start<=s<=t of f(s) + g(t) - g(s)."""
    if isinstance(f, GridPath):
        return _grid_conv(f, g, -1)
    return _step_conv(f, g, -1)


def sup_conv(f, g):
    """(f (o) g)(t) = sup over start<=s<=t of f(s) + g(t) - g(s)."""
    if isinstance(f, GridPath):
        return _grid_conv(f, g, +1)
    return _step_conv(f, g, +1)


def gamma2(f, g) -> PathBundle:
    """Two-path transform (f (x) g, g (o) f)."""
    return PathBundle((inf_conv(f, g), sup_conv(g, f)))


def gamma_n(bundle: PathBundle) -> PathBundle:
    """The full n-path transform; requires n >= 2."""
    if bundle.n < 2:
        raise PathDomainError("transform needs at least two paths")
    out = []
    cur = list(bundle.components)
    while len(cur) > 1:
        P = cur[0]
        nxt = []
        for f in cur[1:]:
            nxt.append(sup_conv(f, P))
            P = inf_conv(P, f)
        out.append(P)
        cur = nxt
    out.append(cur[0])
    return PathBundle(tuple(out))


def chain_inf(bundle: PathBundle):
    """Left-to-right inf-convolution fold f_1 (x) f_2 (x) ... (x) f_n."""
    acc = bundle[0]
    for f in bundle.components[1:]:
        acc = inf_conv(acc, f)
    return acc


def chain_sup(bundle: PathBundle):
    """Left-to-right sup-convolution fold."""
    acc = bundle[0]
    for f in bundle.components[1:]:
        acc = sup_conv(acc, f)
    return acc


# ---------------------------------------------------------------------------
# the multi-split sup functional and its brute-force twin
# ---------------------------------------------------------------------------

def m_n_functional(bundle: PathBundle, t: float) -> float:
    """sup over grid splits 0<=s_1<=...<=s_{n-1}<=t of
    B_n(0,s_1) + B_{n-1}(s_1,s_2) + ... + B_1(s_{n-1},t).

    Computed by the O(nK) scan: the functional equals the sup-convolution
    fold of the reversed bundle evaluated at t (same running-max recursion
    as the one-step dynamic program over the grid).
    """
    for c in bundle.components:
        if not isinstance(c, GridPath):
            raise PathDomainError("multi-split functional is defined on grid bundles")
    j = bundle[0].index_of(t)
    acc = bundle.components[-1].values
    for c in bundle.components[-2::-1]:
        acc = c.values + np.maximum.accumulate(acc - c.values)
    return float(acc[j])


def nested_sup_oracle(bundle: PathBundle, t: float) -> float:
    """Exhaustive-enumeration value of the multi-split functional.

    Test oracle only: refuses instances beyond n=4 or 200 grid steps.
    """
    n = bundle.n
    K = bundle[0].n_steps
    if n > 4 or K > 200:
        raise PathDomainError("oracle refuses instances beyond n=4, K=200")
    j = bundle[0].index_of(t)
    vals = [c.values for c in bundle.components]
    if n == 1:
        return float(vals[0][j])

    best = -np.inf
    splits = [0] * (n - 1)

    def rec(level, lo):
        nonlocal best
        if level == n - 1:
            total = vals[n - 1][splits[0]] - vals[n - 1][0]
            for i in range(1, n - 1):
                total += vals[n - 1 - i][splits[i]] - vals[n - 1 - i][splits[i - 1]]
            total += vals[0][j] - vals[0][splits[n - 2]]
            if total > best:
                best = total
            return
        for s in range(lo, j + 1):
            splits[level] = s
            rec(level + 1, s)

    rec(0, 0)
    return float(best)
