"""Continuous piecewise-linear functions on the real line.

A function is stored as an anchor point (a reference x and the value there),
the slope left of every kink, and an ordered list of (position, slope change)
pairs.  Anchoring on a value instead of an intercept keeps evaluation stable
for kinks far from the origin.  Instances are immutable and safe to share.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

# Kinks whose positions agree to double precision merge; slope changes smaller
# than CHANGE_TOL are dropped.  The merge window must stay at the float
# resolution of the position: distinct kinks can legitimately sit ~1e-12
# apart (a spike kink hugging a sample) while carrying slope changes of 1e7,
# and a wider merge would move them enough to break interpolation.
POSITION_RTOL = 4e-16
CHANGE_TOL = 1e-12


def _normalize_kinks(kinks) -> tuple[tuple[float, float], ...]:
    items = sorted((float(t), float(c)) for t, c in kinks)
    merged: list[list[float]] = []
    for t, c in items:
        if not (math.isfinite(t) and math.isfinite(c)):
            raise ValueError(f"non-finite kink ({t}, {c})")
        if merged and t - merged[-1][0] <= POSITION_RTOL * max(1.0, abs(t)):
            merged[-1][1] += c
        else:
            merged.append([t, c])
    return tuple((t, c) for t, c in merged if abs(c) >= CHANGE_TOL)


@dataclass(frozen=True)
class PiecewiseLinear:
    """A continuous piecewise-linear function with finitely many kinks."""

    anchor: tuple[float, float]
    initial_slope: float
    kinks: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        x0, y0 = self.anchor
        if not (math.isfinite(x0) and math.isfinite(y0) and math.isfinite(self.initial_slope)):
            raise ValueError("non-finite anchor or slope")
        object.__setattr__(self, "anchor", (float(x0), float(y0)))
        object.__setattr__(self, "initial_slope", float(self.initial_slope))
        object.__setattr__(self, "kinks", _normalize_kinks(self.kinks))

    @classmethod
    def affine(cls, slope: float, intercept: float) -> "PiecewiseLinear":
        return cls(anchor=(0.0, intercept), initial_slope=slope)

    @classmethod
    def zero(cls) -> "PiecewiseLinear":
        return cls.affine(0.0, 0.0)

    @classmethod
    def single_kink(cls, point: tuple[float, float], left_slope: float,
                    right_slope: float, kink_x: float) -> "PiecewiseLinear":
        """Two half-lines meeting at ``kink_x``; ``point`` lies on the function."""
        px, py = point
        y_at_kink = py + (left_slope if px <= kink_x else right_slope) * (kink_x - px)
        return cls(anchor=(kink_x, y_at_kink), initial_slope=left_slope,
                   kinks=((kink_x, right_slope - left_slope),))

    # -- cached arrays for evaluation ------------------------------------

    @cached_property
    def _positions(self) -> np.ndarray:
        return np.array([t for t, _ in self.kinks], dtype=float)

    @cached_property
    def _changes(self) -> np.ndarray:
        return np.array([c for _, c in self.kinks], dtype=float)

    @cached_property
    def _right_slopes(self) -> np.ndarray:
        # slope just right of each kink
        return self.initial_slope + np.cumsum(self._changes)

    @cached_property
    def _knot_values(self) -> np.ndarray:
        t = self._positions
        x0, y0 = self.anchor
        shift = float(np.sum(self._changes * np.maximum(x0 - t, 0.0)))
        vals = np.empty_like(t)
        vals[0] = y0 - shift + self.initial_slope * (t[0] - x0)
        if len(t) > 1:
            vals[1:] = vals[0] + np.cumsum(self._right_slopes[:-1] * np.diff(t))
        return vals

    # -- evaluation -------------------------------------------------------

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(xs)):
            raise ValueError("evaluation point must be finite")
        x0, y0 = self.anchor
        if not self.kinks:
            out = y0 + self.initial_slope * (xs - x0)
            return float(out) if np.isscalar(x) or xs.ndim == 0 else out
        t = self._positions
        idx = np.searchsorted(t, xs, side="right")
        left = idx == 0
        base_idx = np.maximum(idx - 1, 0)
        slopes = np.where(left, self.initial_slope, self._right_slopes[base_idx])
        refs_x = np.where(left, t[0], t[base_idx])
        refs_y = np.where(left, self._knot_values[0], self._knot_values[base_idx])
        out = refs_y + slopes * (xs - refs_x)
        return float(out) if np.isscalar(x) or xs.ndim == 0 else out

    def slope_left_of(self, x):
        """Slope of the segment immediately left of ``x`` (the incoming slope)."""
        xs = np.asarray(x, dtype=float)
        if not self.kinks:
            out = np.full_like(xs, self.initial_slope, dtype=float)
        else:
            idx = np.searchsorted(self._positions, xs, side="left")
            padded = np.concatenate(([self.initial_slope], self._right_slopes))
            out = padded[idx]
        return float(out) if np.isscalar(x) or xs.ndim == 0 else out

    def slope_right_of(self, x):
        """Slope of the segment immediately right of ``x``."""
        xs = np.asarray(x, dtype=float)
        if not self.kinks:
            out = np.full_like(xs, self.initial_slope, dtype=float)
        else:
            idx = np.searchsorted(self._positions, xs, side="right")
            padded = np.concatenate(([self.initial_slope], self._right_slopes))
            out = padded[idx]
        return float(out) if np.isscalar(x) or xs.ndim == 0 else out

    def breakpoints_in(self, lo: float, hi: float) -> np.ndarray:
        """Sorted array ``[lo, kinks strictly inside, hi]``."""
        t = self._positions if self.kinks else np.empty(0)
        inner = t[(t > lo) & (t < hi)]
        return np.concatenate(([lo], inner, [hi]))

    def __sub__(self, other: "PiecewiseLinear") -> "PiecewiseLinear":
        return difference(self, other)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "anchor": list(self.anchor),
            "initial_slope": self.initial_slope,
            "kinks": [list(k) for k in self.kinks],
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "PiecewiseLinear":
        doc = json.loads(text)
        return cls(anchor=tuple(doc["anchor"]), initial_slope=doc["initial_slope"],
                   kinks=tuple(tuple(k) for k in doc["kinks"]))


@dataclass(frozen=True)
class ReluNetwork:
    """Two-layer ReLU network ``sum a_j (w_j x + b_j)_+ + a0 x + b0``."""

    units: tuple[tuple[float, float, float], ...]   # (a_j, w_j, b_j)
    skip: tuple[float, float]                        # (a0, b0)

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        a0, b0 = self.skip
        out = a0 * xs + b0
        for a, w, b in self.units:
            out = out + a * np.maximum(w * xs + b, 0.0)
        return float(out) if np.isscalar(x) or xs.ndim == 0 else out

    @property
    def squared_norm(self) -> float:
        """Squared parameter norm; the skip connection is excluded."""
        return sum(a * a + w * w + b * b for a, w, b in self.units)


def evaluate(f: PiecewiseLinear, x):
    return f(x)


def representation_cost(f: PiecewiseLinear) -> float:
    """Weighted total variation of the slope: sum over kinks of sqrt(1+t^2)|c|.

    Zero exactly when the function is affine.  Equals half the minimal squared
    parameter norm of a two-layer ReLU network (with unregularized skip)
    realizing the function.
    """
    return float(sum(math.sqrt(1.0 + t * t) * abs(c) for t, c in f.kinks))


def to_network(f: PiecewiseLinear) -> ReluNetwork:
    """Norm-minimal two-layer ReLU realization, one unit per kink.

    Each kink (t, c) becomes a unit with w > 0, a*w = c and b = -w*t, scaled so
    that a^2 = w^2 + b^2; the affine part rides on the skip connection.  The
    squared norm of the units is ``2 * representation_cost(f)``.
    """
    units = []
    for t, c in f.kinks:
        scale = (1.0 + t * t) ** 0.25
        w = math.sqrt(abs(c)) / scale
        a = math.copysign(math.sqrt(abs(c)) * scale, c)
        units.append((a, w, -w * t))
    x0, y0 = f.anchor
    shift = sum(c * max(x0 - t, 0.0) for t, c in f.kinks)
    a0 = f.initial_slope
    b0 = y0 - shift - a0 * x0
    return ReluNetwork(units=tuple(units), skip=(a0, b0))


def difference(f: PiecewiseLinear, g: PiecewiseLinear) -> PiecewiseLinear:
    """Pointwise ``f - g`` with the merged kink set."""
    x0 = f.anchor[0]
    kinks = list(f.kinks) + [(t, -c) for t, c in g.kinks]
    return PiecewiseLinear(anchor=(x0, f(x0) - g(x0)),
                           initial_slope=f.initial_slope - g.initial_slope,
                           kinks=kinks)


def negate(f: PiecewiseLinear) -> PiecewiseLinear:
    x0, y0 = f.anchor
    return PiecewiseLinear(anchor=(x0, -y0), initial_slope=-f.initial_slope,
                           kinks=[(t, -c) for t, c in f.kinks])


def affine_min(f: PiecewiseLinear, g: PiecewiseLinear) -> PiecewiseLinear:
    """Pointwise minimum of two affine functions (at most one kink)."""
    if f.kinks or g.kinks:
        raise ValueError("affine_min requires kink-free inputs")
    sf, sg = f.initial_slope, g.initial_slope
    if sf == sg:
        return f if f(0.0) <= g(0.0) else g
    x_cross = (g(0.0) - f(0.0)) / (sf - sg)
    lo, hi = (f, g) if sf < sg else (g, f)
    # below the crossing the steeper line is smaller on the right
    return PiecewiseLinear.single_kink((x_cross, f(x_cross)),
                                       left_slope=hi.initial_slope,
                                       right_slope=lo.initial_slope,
                                       kink_x=x_cross)


def affine_max(f: PiecewiseLinear, g: PiecewiseLinear) -> PiecewiseLinear:
    return negate(affine_min(negate(f), negate(g)))
