"""Uniformly sampled functions on a closed interval."""

from __future__ import annotations

import csv
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a real function at ``n + 1`` equispaced nodes of ``[lo, hi]``.

    Between nodes the function is understood as its piecewise-linear
    interpolant. The sample array is copied and made read-only.
    """

    lo: float
    hi: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("values must be a 1-d sequence with at least 2 samples")
        if not self.hi > self.lo:
            raise ValueError(f"hi ({self.hi}) must exceed lo ({self.lo})")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        object.__setattr__(self, "values", values)

    @classmethod
    def sample(cls, fn, lo: float, hi: float, n: int) -> "GridFunction":
        """Sample a vectorised callable at the nodes of an ``n``-cell grid."""
        nodes = np.linspace(lo, hi, n + 1)
        return cls(lo, hi, fn(nodes))

    @property
    def n(self) -> int:
        return self.values.size - 1

    @property
    def h(self) -> float:
        return (self.hi - self.lo) / self.n

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n + 1)

    def node(self, i: int) -> float:
        return self.lo + i * (self.hi - self.lo) / self.n

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.lo, self.hi, values)

    def same_grid(self, other: "GridFunction") -> bool:
        return self.lo == other.lo and self.hi == other.hi and self.n == other.n

    def __call__(self, x):
        """Evaluate the piecewise-linear interpolant (clamped outside)."""
        return np.interp(x, self.nodes, self.values)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __add__(self, other):
        if isinstance(other, GridFunction):
            _check_same_grid(self, other)
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + other)

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            _check_same_grid(self, other)
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - other)

    def __mul__(self, scalar):
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__

    def to_csv(self, path, var: str = "m", value_name: str = "value") -> None:
        write_columns(path, [var, value_name], [self.nodes, self.values])

    @classmethod
    def from_csv(cls, path) -> "GridFunction":
        header, cols = read_columns(path)
        if len(cols) < 2:
            raise ValueError(f"{path}: expected two columns, got header {header}")
        x, y = cols[0], cols[1]
        if x.size >= 3 and not np.allclose(np.diff(x), (x[-1] - x[0]) / (x.size - 1), rtol=1e-9, atol=1e-12):
            raise ValueError(f"{path}: nodes are not equispaced")
        return cls(x[0], x[-1], y)


def _check_same_grid(a: GridFunction, b: GridFunction) -> None:
    if not a.same_grid(b):
        raise ValueError(
            f"grid mismatch: [{a.lo}, {a.hi}]/{a.n} vs [{b.lo}, {b.hi}]/{b.n}"
        )


def cumulative_trapezoid(f: GridFunction) -> GridFunction:
    """Running integral from ``lo`` by the trapezoid rule (exact for the interpolant)."""
    v = f.values
    out = np.empty_like(v)
    out[0] = 0.0
    np.cumsum(0.5 * f.h * (v[:-1] + v[1:]), out=out[1:])
    return f.with_values(out)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_columns(path, header, columns) -> None:
    """Write equal-length columns as CSV, atomically (temp file then rename)."""
    path = Path(path)
    rows = zip(*[np.asarray(c, dtype=float) for c in columns])
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(x) for x in row])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_columns(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader if row]
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return header, [data[:, j] for j in range(len(header))]
