"""Brute-force references for certifying the main solver and risk evaluators.

The exhaustive search parameterizes the interpolant by its kink positions,
one per inter-sample interval, with the segment slopes recovered from the
interpolation constraints (the leftmost piece follows the first secant, which
the minimizer is known to do).  This is a different parameterization from the
main solver's slope coordinates, so agreement between the two is a real
cross-check rather than a reimplementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize as scipy_optimize

from .dataset import Dataset
from .pwl import PiecewiseLinear, difference, representation_cost

_MAX_GRID_CELLS = 600_000


@dataclass(frozen=True)
class OracleResult:
    cost: float
    function: PiecewiseLinear
    search_resolution: float
    candidates_examined: int


def _chain_cost(x: np.ndarray, y: np.ndarray, taus):
    """Cost of the interpolant with kinks at ``taus`` (arrays broadcast).

    Piece j passes through sample j; continuity at each kink determines the
    next slope.  Returns (cost, slopes list).
    """
    n = len(x)
    m = [np.broadcast_to(np.asarray((y[1] - y[0]) / (x[1] - x[0])),
                         np.broadcast_shapes(*(np.shape(t) for t in taus)))]
    cost = 0.0
    for j in range(n - 1):
        tau = taus[j]
        m_next = (y[j] - y[j + 1] + m[j] * (tau - x[j])) / (tau - x[j + 1])
        cost = cost + np.sqrt(1.0 + tau * tau) * np.abs(m_next - m[j])
        m.append(m_next)
    return cost, m


def brute_force_minnorm(dataset: Dataset, resolution: float = 1e-3) -> OracleResult:
    """Grid search over kink positions followed by coordinate polishing.

    ``resolution`` is the target grid spacing as a fraction of each interval;
    for three or more free kinks the grid is coarsened so the product stays
    under ``_MAX_GRID_CELLS`` cells, and the polish stage recovers the
    precision.
    """
    n = dataset.n
    if n > 6:
        raise ValueError("brute force supports at most 6 points")
    if not 0.0 < resolution <= 0.5:
        raise ValueError("resolution must lie in (0, 0.5]")
    x = dataset.x
    y = dataset.y
    dims = n - 1
    per_dim = max(2, round(1.0 / resolution))
    cap = max(2, int(_MAX_GRID_CELLS ** (1.0 / dims)))
    per_dim = min(per_dim, cap)
    fracs = np.arange(per_dim) / per_dim   # [0, 1), refining grids are nested

    lo_b = np.array([x[j] for j in range(dims)])
    hi_b = np.array([x[j + 1] - 1e-12 * (x[j + 1] - x[j]) for j in range(dims)])
    lengths = np.diff(x)

    grids = [x[j] + fracs * lengths[j] for j in range(dims)]
    mesh = np.meshgrid(*grids, indexing="ij", sparse=True)
    cost, _ = _chain_cost(x, y, mesh)
    examined = int(cost.size)

    def scalar_cost(ts):
        c, _ = _chain_cost(x, y, [np.asarray(t) for t in ts])
        return float(c)

    def canonicalize(taus):
        """Snap cost-neutral kinks to the left sample.

        A kink with zero slope change contributes nothing wherever it sits,
        which creates flat ridges in the search space; pinning such
        coordinates dedups candidates that describe the same function.
        """
        nonlocal examined
        taus = taus.copy()
        value = scalar_cost(taus)
        for j in range(dims):
            if taus[j] == x[j]:
                continue
            trial = taus.copy()
            trial[j] = x[j]
            trial_value = scalar_cost(trial)
            examined += 1
            if trial_value <= value + 1e-12 * max(1.0, value):
                taus, value = trial, min(value, trial_value)
        return taus, value

    def select(pool, min_sep, limit):
        """Lowest-cost candidates that are pairwise separated."""
        pool = sorted(pool, key=lambda c: c[1])
        kept = []
        for taus, value in pool:
            if any(np.max(np.abs(taus - other) / min_sep) < 1.0 for other, _ in kept):
                continue
            kept.append((taus, value))
            if len(kept) >= limit:
                break
        return kept

    flat_order = np.argsort(cost, axis=None)[:512]
    seeds = []
    for flat in flat_order:
        idx = np.unravel_index(int(flat), cost.shape)
        taus = np.array([grids[j][idx[j]] for j in range(dims)])
        seeds.append((taus, float(cost[idx])))
    spacing = lengths / per_dim
    candidates = select([canonicalize(t) for t, _ in seeds], spacing, 24)

    # zoom rounds: a small product grid around every surviving candidate
    local_fracs = np.linspace(-1.0, 1.0, 7)
    for _ in range(4):
        pool = list(candidates)
        for taus, _ in candidates:
            local = [np.clip(taus[j] + local_fracs * spacing[j], lo_b[j], hi_b[j])
                     for j in range(dims)]
            local_mesh = np.meshgrid(*local, indexing="ij", sparse=True)
            local_cost, _ = _chain_cost(x, y, local_mesh)
            examined += int(local_cost.size)
            for flat in np.argsort(local_cost, axis=None)[:8]:
                idx = np.unravel_index(int(flat), local_cost.shape)
                cand = np.array([local[j][idx[j]] for j in range(dims)])
                pool.append((cand, float(local_cost[idx])))
        spacing = spacing / 3.0
        candidates = select([canonicalize(t) for t, _ in pool], spacing, 24)

    # finish the leaders with Powell, which handles the diagonal valleys that
    # pure coordinate refinement stalls in
    best_taus, best = candidates[0]
    for cand_taus, cand_value in candidates[:6]:
        if cand_value < best:
            best_taus, best = cand_taus, cand_value
        point = cand_taus
        value = cand_value
        for _ in range(8):   # restarts reset Powell's direction set in valleys
            result = scipy_optimize.minimize(
                lambda ts: scalar_cost(np.clip(ts, lo_b, hi_b)),
                point, method="Powell",
                bounds=list(zip(lo_b, hi_b)),
                options={"xtol": 1e-13, "ftol": 1e-15, "maxiter": 400 * dims})
            examined += int(result.nfev)
            point = np.clip(result.x, lo_b, hi_b)
            new_value = scalar_cost(point)
            if value - new_value <= 1e-13 * max(1.0, value):
                value = min(value, new_value)
                break
            value = new_value
        if value < best:
            best_taus, best = point, value
    taus, _ = canonicalize(best_taus)

    _, slopes = _chain_cost(x, y, [np.asarray(t) for t in taus])
    slopes = [float(s) for s in slopes]
    kinks = [(float(taus[j]), slopes[j + 1] - slopes[j]) for j in range(dims)]
    fn_best = PiecewiseLinear(anchor=(float(x[0]), float(y[0])),
                              initial_slope=slopes[0], kinks=kinks)
    return OracleResult(cost=representation_cost(fn_best), function=fn_best,
                        search_resolution=1.0 / per_dim, candidates_examined=examined)


def monte_carlo_risk(f: PiecewiseLinear, target: PiecewiseLinear, noise, p: float,
                     samples: int, rng: np.random.Generator) -> tuple[float, float]:
    """Plain Monte Carlo estimate of the population risk with its standard error."""
    if samples < 1_000:
        raise ValueError("need at least 1000 samples")
    diff = difference(f, target)
    total = 0.0
    total_sq = 0.0
    done = 0
    chunk = 1 << 20
    while done < samples:
        take = min(chunk, samples - done)
        xs = rng.random(take)
        eps = noise.sample(rng, take)
        vals = np.abs(diff(xs) - eps) ** p
        total += float(np.sum(vals))
        total_sq += float(np.sum(vals * vals))
        done += take
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    return mean, math.sqrt(var / samples)


def sup_distance(f: PiecewiseLinear, g: PiecewiseLinear, grid_points: int = 1001) -> float:
    """max |f - g| over [0, 1]; exact for piecewise-linear pairs.

    The maximum of |f - g| on [0, 1] is attained at a kink of the difference
    or at the boundary; the uniform grid is belt and braces.
    """
    if grid_points < 2:
        raise ValueError("need at least two grid points")
    diff = difference(f, g)
    candidates = [np.linspace(0.0, 1.0, grid_points), np.array([0.0, 1.0])]
    kink_pos = np.array([t for t, _ in diff.kinks])
    if len(kink_pos):
        inside = kink_pos[(kink_pos >= 0.0) & (kink_pos <= 1.0)]
        candidates.append(inside)
    xs = np.concatenate(candidates)
    return float(np.max(np.abs(diff(xs))))
