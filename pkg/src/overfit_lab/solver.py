"""Minimum weighted-total-variation interpolation.

The minimizer is continuous piecewise linear with at most one kink per
interval between neighboring samples and none outside them, so it is fully
described by the slope arriving at each sample.  Intervals whose endpoint
curvatures differ (or vanish) are pinned to the secant, which decouples the
problem into independent runs of same-curvature intervals.  An isolated free
interval has a closed-form solution (the two neighboring secants extended to
their intersection); longer runs are solved by coordinate descent on the
arrival slopes, each one-dimensional step by a scan plus golden-section
search.  Arrival slopes are kept inside the interval spanned by the two
adjacent secant slopes, which the optimum is known to satisfy; this makes
every certified envelope and slope bound hold by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .interpolators import curvature, pinned_intervals
from .pwl import PiecewiseLinear, representation_cost

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SolverOptions:
    interpolation_tol: float = 1e-9
    cost_rtol: float = 1e-10       # relative cost improvement treated as converged
    max_iters: int | None = None   # coordinate-descent sweeps per run; default 10*n
    scan_points: int = 17          # coarse scan before golden-section
    slope_tol: float = 1e-12       # golden-section width target, relative to slope scale


@dataclass(frozen=True)
class MinNormResult:
    function: PiecewiseLinear
    cost: float
    converged: bool
    sweeps: int
    max_interpolation_error: float


def _weight(tau) -> float:
    return np.sqrt(1.0 + tau * tau)


def _interval_cost(x_lo: float, x_hi: float, delta: float, s: float, t: float) -> float:
    """Cost of the single kink inside [x_lo, x_hi) given arrival slopes.

    ``s`` is the slope entering the interval at x_lo, ``t`` the slope arriving
    at x_hi, ``delta`` the secant slope.  The kink position follows from the
    two slopes and the interpolation constraint; ``t == delta`` puts it at the
    left sample.
    """
    change = t - s
    if abs(change) < 1e-15 * (abs(s) + abs(t) + 1.0):
        return 0.0
    tau = x_lo + (x_hi - x_lo) * (t - delta) / change
    tau = min(max(tau, x_lo), x_hi)
    return _weight(tau) * abs(change)


def _golden_section(fn, lo: float, hi: float, tol: float) -> tuple[float, float]:
    a, b = lo, hi
    # keep the target width above float resolution of the bracket endpoints
    tol = max(tol, 8.0 * np.finfo(float).eps * max(abs(lo), abs(hi), 1.0))
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(200):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fn(d)
    x = c if fc <= fd else d
    return x, min(fc, fd)


def _minimize_on_interval(fn, lo: float, hi: float, scan_points: int, tol: float):
    """Scan + golden-section; robust to mild non-unimodality, deterministic."""
    tol = tol * max(1.0, abs(lo), abs(hi))
    if hi - lo <= tol:
        mid = 0.5 * (lo + hi)
        return mid, fn(mid)
    grid = np.linspace(lo, hi, scan_points)
    vals = [fn(g) for g in grid]
    k = int(np.argmin(vals))
    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, scan_points - 1)]
    x, fx = _golden_section(fn, a, b, tol)
    if vals[k] < fx:
        return float(grid[k]), vals[k]
    return float(x), float(fx)


def solve_interval_run(dataset: Dataset, first: int, last: int,
                       options: SolverOptions | None = None) -> tuple[np.ndarray, float, bool, int]:
    """Optimize the arrival slopes for the free intervals ``first..last``.

    Returns (slopes arriving at points first+1..last+1, run cost, converged,
    sweeps).  The run must be delimited by pinned intervals on both sides.
    """
    opts = options or SolverOptions()
    x = dataset.x
    delta = dataset.secants
    if first < 1 or last > dataset.n - 3:
        raise ValueError("run must be delimited by pinned intervals")

    # The slope arriving at point j is boxed by the adjacent secant slopes.
    # For every variable except the run's last, the corner equal to the next
    # secant slope would place that interval's kink on its right endpoint
    # (the next interval's territory), so that corner is shaved by an epsilon.
    def box(j: int) -> tuple[float, float]:
        lo = min(delta[j - 1], delta[j])
        hi = max(delta[j - 1], delta[j])
        if j <= last:
            shave = 1e-13 * (hi - lo)
            if delta[j] <= lo:
                lo += shave
            else:
                hi -= shave
        return lo, hi

    if first == last:
        # isolated spike: extend the neighboring secants to their intersection
        a = first
        s = np.array([delta[a + 1]])
        cost = _interval_cost(x[a], x[a + 1], delta[a], delta[a - 1], s[0])
        return s, cost, True, 0

    m = last - first + 1
    s = np.array([delta[j - 1] for j in range(first + 1, last + 2)])  # spline start

    def local(j_idx: int, value: float, state: np.ndarray) -> float:
        j = first + 1 + j_idx
        left = state[j_idx - 1] if j_idx > 0 else delta[first - 1]
        right = state[j_idx + 1] if j_idx + 1 < m else delta[last + 1]
        return (_interval_cost(x[j - 1], x[j], delta[j - 1], left, value)
                + _interval_cost(x[j], x[j + 1], delta[j], value, right))

    def total(state: np.ndarray) -> float:
        c = 0.0
        for j_idx in range(m):
            j = first + 1 + j_idx
            left = state[j_idx - 1] if j_idx > 0 else delta[first - 1]
            c += _interval_cost(x[j - 1], x[j], delta[j - 1], left, state[j_idx])
        c += _interval_cost(x[last + 1], x[last + 2], delta[last + 1],
                            state[m - 1], delta[last + 1])
        return c

    max_sweeps = opts.max_iters if opts.max_iters is not None else 10 * dataset.n
    cost = total(s)
    converged = False
    sweep = 0
    while sweep < max_sweeps:
        sweep += 1
        for j_idx in range(m):
            lo, hi = box(first + 1 + j_idx)
            s[j_idx], _ = _minimize_on_interval(
                lambda v: local(j_idx, v, s), lo, hi, opts.scan_points, opts.slope_tol)
        new_cost = total(s)
        if cost - new_cost <= opts.cost_rtol * max(1.0, abs(cost)):
            converged = True
            cost = new_cost
            break
        cost = new_cost
    return s, cost, converged, sweep


def _assemble(dataset: Dataset, slopes: np.ndarray) -> PiecewiseLinear:
    """Build the interpolant from the slope arriving at each sample."""
    x = dataset.x
    y = dataset.y
    delta = dataset.secants
    kinks = []
    for i in range(dataset.n - 1):
        s, t = slopes[i], slopes[i + 1]
        change = t - s
        if abs(change) < 1e-15 * (abs(s) + abs(t) + 1.0):
            continue
        tau = x[i] + (x[i + 1] - x[i]) * (t - delta[i]) / change
        tau = min(max(tau, x[i]), x[i + 1])
        kinks.append((tau, change))
    return PiecewiseLinear(anchor=(float(x[0]), float(y[0])),
                           initial_slope=float(slopes[0]), kinks=kinks)


def minnorm_interpolate(dataset: Dataset, options: SolverOptions | None = None) -> MinNormResult:
    """Interpolant of minimal weighted total variation through the samples.

    Pinned intervals follow the secants exactly; free runs are optimized as in
    :func:`solve_interval_run`.  The returned flag reports whether every run's
    coordinate descent met the relative cost tolerance within its sweep budget.
    """
    opts = options or SolverOptions()
    n = dataset.n
    delta = dataset.secants
    # arrival slopes for the spline representation: pinned constraints hold
    slopes = np.empty(n)
    slopes[0] = delta[0]
    slopes[1:] = delta
    converged = True
    sweeps = 0
    if n > 3:
        pinned = pinned_intervals(dataset)
        i = 1
        while i <= n - 3:
            if pinned[i]:
                i += 1
                continue
            j = i
            while j + 1 <= n - 3 and not pinned[j + 1]:
                j += 1
            run_slopes, _, ok, used = solve_interval_run(dataset, i, j, opts)
            slopes[i + 1:j + 2] = run_slopes
            converged &= ok
            sweeps = max(sweeps, used)
            i = j + 1
    f = _assemble(dataset, slopes)
    err = float(np.max(np.abs(f(dataset.x) - dataset.y)))
    # Kink positions are doubles, so each unit of slope variation costs about
    # one ulp of value accuracy; the check cannot be tighter than that.
    representable = np.finfo(float).eps * sum(abs(c) for _, c in f.kinks)
    if err > max(opts.interpolation_tol, representable):
        converged = False
    return MinNormResult(function=f, cost=representation_cost(f), converged=converged,
                         sweeps=sweeps, max_interpolation_error=err)
