"""Spline interpolators and the geometry of the min-cost interpolant.

Point and interval indices are 0-based throughout: interval ``i`` is
``[x_i, x_{i+1})`` and ``g_i`` denotes the secant line through points
``i`` and ``i+1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .pwl import PiecewiseLinear, affine_max, affine_min

# Secants closer than this (relative to their size) count as collinear.
COLLINEAR_RTOL = 1e-10


def linear_spline(dataset: Dataset) -> PiecewiseLinear:
    """Connect-the-dots interpolant, constant outside [x_0, x_{n-1}]."""
    d = dataset.secants
    x = dataset.x
    kinks = [(x[0], d[0])]
    kinks += [(x[j], d[j] - d[j - 1]) for j in range(1, len(d))]
    kinks.append((x[-1], -d[-1]))
    return PiecewiseLinear(anchor=(x[0], dataset.y[0]), initial_slope=0.0, kinks=kinks)


def extended_spline(dataset: Dataset) -> PiecewiseLinear:
    """Like the linear spline but with the end secants extended outward."""
    d = dataset.secants
    x = dataset.x
    kinks = [(x[j], d[j] - d[j - 1]) for j in range(1, len(d))]
    return PiecewiseLinear(anchor=(x[0], dataset.y[0]), initial_slope=d[0], kinks=kinks)


def secant_line(dataset: Dataset, i: int) -> PiecewiseLinear:
    """The affine function g_i through points i and i+1."""
    return PiecewiseLinear(anchor=(dataset.x[i], dataset.y[i]),
                           initial_slope=dataset.secants[i])


def curvature(dataset: Dataset) -> np.ndarray:
    """Discrete curvature label per point: sign of the secant-slope change.

    The slope before the first point and after the last reuse the adjacent
    secant, so the two endpoints are always labeled 0.  Slope changes below
    ``COLLINEAR_RTOL`` (relative) also collapse to 0.
    """
    padded = dataset.secants_padded
    left, right = padded[:-1], padded[1:]
    diff = right - left
    tol = COLLINEAR_RTOL * np.maximum(1.0, np.maximum(np.abs(left), np.abs(right)))
    labels = np.sign(diff).astype(int)
    labels[np.abs(diff) <= tol] = 0
    return labels


def special_points_from_labels(labels) -> list[int]:
    """Left-to-right scan of label changes; the first point is always special."""
    points = [0]
    for j in range(1, len(labels)):
        if labels[j] != labels[points[-1]]:
            points.append(j)
    return points


def special_points(dataset: Dataset) -> list[int]:
    """0-based indices where the curvature label changes, starting at point 0."""
    return special_points_from_labels(curvature(dataset))


def pinned_intervals(dataset: Dataset) -> np.ndarray:
    """Boolean mask over intervals; True where the interpolant must follow g_i.

    Interval i is free to bulge only when both endpoints carry the same
    nonzero curvature label.  The endpoint labels are always 0, so the first
    and last intervals are always pinned.
    """
    labels = curvature(dataset)
    same = (labels[:-1] == labels[1:]) & (labels[:-1] != 0)
    return ~same


@dataclass(frozen=True)
class Envelope:
    """Pointwise bounds for the min-cost interpolant on [x_lo, x_hi)."""

    x_lo: float
    x_hi: float
    lower: PiecewiseLinear
    upper: PiecewiseLinear


def envelope(dataset: Dataset) -> list[Envelope]:
    """Per-interval envelopes covering [0, 1] (n+1 intervals).

    On pinned intervals lower and upper coincide with the secant; where two
    neighboring points share curvature +1 the interpolant lies between
    max(g_{i-1}, g_{i+1}) and g_i, and symmetrically for -1.
    """
    x = dataset.x
    labels = curvature(dataset)
    n = dataset.n
    g_first = secant_line(dataset, 0)
    g_last = secant_line(dataset, n - 2)
    out = [Envelope(0.0, float(x[0]), g_first, g_first)]
    for i in range(n - 1):
        gi = secant_line(dataset, i)
        lo = hi = gi
        if 1 <= i <= n - 3 and labels[i] == labels[i + 1] != 0:
            neighbor_lo = secant_line(dataset, i - 1)
            neighbor_hi = secant_line(dataset, i + 1)
            if labels[i] == 1:
                lo, hi = affine_max(neighbor_lo, neighbor_hi), gi
            else:
                lo, hi = gi, affine_min(neighbor_lo, neighbor_hi)
        out.append(Envelope(float(x[i]), float(x[i + 1]), lo, hi))
    out.append(Envelope(float(x[-1]), 1.0, g_last, g_last))
    return out


def exact_spike(dataset: Dataset, k: int) -> PiecewiseLinear | None:
    """Closed-form spike segment at the k-th special point, if one is forced.

    When two consecutive special points are exactly two indices apart (and the
    curvature there is nonzero), the interpolant on the middle interval is the
    min (for curvature -1) or max (for +1) of the two extended neighboring
    secants, with a single kink at their intersection.  Returns None when the
    configuration does not force a spike.
    """
    points = special_points(dataset)
    if k < 0 or k + 1 >= len(points):
        return None
    nk = points[k]
    if points[k + 1] != nk + 2:
        return None
    labels = curvature(dataset)
    if labels[nk] == 0 or labels[nk] != labels[nk + 1]:
        return None
    left = secant_line(dataset, nk - 1)
    right = secant_line(dataset, nk + 1)
    return affine_min(left, right) if labels[nk] == -1 else affine_max(left, right)
