"""Distances between cumulative mass functions on the line."""

from __future__ import annotations

import numpy as np


def _merge_breakpoints(x1, y1, x2, y2):
    x1, y1, x2, y2 = (np.asarray(a, dtype=float) for a in (x1, y1, x2, y2))
    xs = np.union1d(x1, x2)
    a = np.interp(xs, x1, y1)
    b = np.interp(xs, x2, y2)
    return xs, a - b


def w1_distance(x1, M1, x2, M2) -> float:
    """``int |M1 - M2| dx`` for two piecewise-linear cumulative functions.

    Each function is given by breakpoints (``x`` nondecreasing) and is constant
    beyond its first and last breakpoint.  The integral is exact: on every
    segment of the common refinement the difference is linear, and segments
    where it changes sign are split at the root.
    """
    xs, d = _merge_breakpoints(x1, M1, x2, M2)
    dx = np.diff(xs)
    d0, d1 = d[:-1], d[1:]
    same = d0 * d1 >= 0
    area = np.where(same, 0.5 * dx * np.abs(d0 + d1), 0.0)
    cross = ~same
    denom = np.abs(d0[cross]) + np.abs(d1[cross])
    area[cross] = 0.5 * dx[cross] * (d0[cross] ** 2 + d1[cross] ** 2) / denom
    return float(np.sum(area))


def sup_distance(x1, M1, x2, M2) -> float:
    """Sup of ``|M1 - M2|``; attained at a breakpoint of one of the two."""
    _, d = _merge_breakpoints(x1, M1, x2, M2)
    return float(np.max(np.abs(d)))


def loglog_slope(ns, errors) -> float:
    """Least-squares slope of ``log(error)`` against ``log(n)``."""
    return float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(errors, float)), 1)[0])
