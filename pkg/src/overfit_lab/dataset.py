"""Sorted univariate samples on [0, 1] with derived gaps and secant slopes."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Dataset:
    """Strictly increasing x in [0, 1] with responses y.

    ``gaps`` has n+1 entries: x_1, the interior spacings, and 1 - x_n.
    ``secants`` has n-1 entries, the chord slopes between neighbors;
    ``secants_padded`` prepends the first and appends the last slope so that
    callers can index a slope "before" the first point and "after" the last.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape:
            raise ValueError("x and y must be 1-d arrays of equal length")
        if len(x) < 2:
            raise ValueError("need at least two points")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("non-finite sample")
        if np.any(x < 0.0) or np.any(x > 1.0):
            raise ValueError("x must lie in [0, 1]")
        if np.any(np.diff(x) <= 0.0):
            raise ValueError("x must be strictly increasing (duplicates rejected)")
        x = x.copy()
        y = y.copy()
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def gaps(self) -> np.ndarray:
        x = self.x
        return np.concatenate(([x[0]], np.diff(x), [1.0 - x[-1]]))

    @property
    def secants(self) -> np.ndarray:
        return np.diff(self.y) / np.diff(self.x)

    @property
    def secants_padded(self) -> np.ndarray:
        d = self.secants
        return np.concatenate(([d[0]], d, [d[-1]]))


def load_csv(path_or_file) -> Dataset:
    """Read a two-column x,y CSV; a non-numeric first row is taken as a header."""
    if hasattr(path_or_file, "read"):
        rows = list(csv.reader(path_or_file))
    else:
        with open(path_or_file, newline="") as fh:
            rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise ValueError("empty CSV")
    try:
        float(rows[0][0])
    except ValueError:
        rows = rows[1:]
    if not rows:
        raise ValueError("CSV has a header but no data rows")
    pairs = []
    for r in rows:
        if len(r) < 2:
            raise ValueError(f"expected two columns, got {r!r}")
        pairs.append((float(r[0]), float(r[1])))
    order = np.argsort([p[0] for p in pairs], kind="stable")
    x = np.array([pairs[i][0] for i in order])
    y = np.array([pairs[i][1] for i in order])
    return Dataset(x=x, y=y)


def dump_csv(dataset: Dataset, path_or_file, header: bool = True) -> None:
    def write(fh):
        w = csv.writer(fh)
        if header:
            w.writerow(["x", "y"])
        for xi, yi in zip(dataset.x, dataset.y):
            w.writerow([repr(float(xi)), repr(float(yi))])

    if hasattr(path_or_file, "write"):
        write(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            write(fh)
