"""Convexity primitives on sampled functions.

A function ``f`` on ``[0, 1]`` is *eps-convex* when ``f(m) - eps*m**2/2`` is
convex; its eps-convex hull is the largest eps-convex minorant.  On a grid the
hull is obtained from an ordinary lower convex envelope after subtracting the
quadratic ``eps*m**2/2`` and adding it back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridFunction

# Nodes whose value sits within this many ulps (relative to the data scale)
# of the envelope are reported with their input value, so that hulls are
# idempotent in floating point.
_SNAP_ULPS = 64.0


@dataclass(frozen=True)
class EpsParabola:
    """Quadratic with second derivative ``eps`` through ``(m1, y1)`` and ``(m2, y2)``."""

    eps: float
    m1: float
    y1: float
    m2: float
    y2: float

    def __post_init__(self):
        if not self.m1 < self.m2:
            raise ValueError("EpsParabola needs m1 < m2")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        w = self.m2 - self.m1
        return (
            self.y1 * (self.m2 - s) / w
            + self.y2 * (s - self.m1) / w
            - 0.5 * self.eps * (self.m2 - s) * (s - self.m1)
        )


def lower_hull_indices(y) -> np.ndarray:
    """Indices of the vertices of the lower convex envelope of ``(i, y[i])``.

    Monotone chain over integer abscissae, so the orientation test is exact in
    ``x``; collinear points are dropped.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    if n <= 2:
        return np.arange(n)
    d2 = y[:-2] - 2.0 * y[1:-1] + y[2:]
    if np.all(d2 > 0.0):
        return np.arange(n)
    ys = y.tolist()
    hull: list[int] = []
    for i in range(n):
        yi = ys[i]
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            # cross((a - o), (i - o)) <= 0 means a is not strictly below the chord o-i
            if (a - o) * (yi - ys[o]) - (ys[a] - ys[o]) * (i - o) <= 0.0:
                hull.pop()
            else:
                break
        hull.append(i)
    return np.asarray(hull, dtype=np.intp)


def _hull_with_snap(values: np.ndarray, quad: np.ndarray | None) -> np.ndarray:
    g = values if quad is None else values - quad
    idx = lower_hull_indices(g)
    env = np.interp(np.arange(g.size, dtype=float), idx.astype(float), g[idx])
    out = env if quad is None else env + quad
    scale = max(1.0, float(np.max(np.abs(values))), float(np.max(np.abs(g))))
    snap = (g - env) <= _SNAP_ULPS * np.finfo(float).eps * scale
    out = np.where(snap, values, out)
    return out


def convex_hull(f: GridFunction) -> GridFunction:
    """Lower convex envelope of the piecewise-linear interpolant, at the nodes."""
    return f.with_values(_hull_with_snap(f.values, None))


def eps_convex_hull(f: GridFunction, eps: float) -> GridFunction:
    """Largest eps-convex minorant of ``f`` on its grid.

    Computed as ``conv(f - eps*m**2/2) + eps*m**2/2``.  ``eps == 0`` gives
    exactly :func:`convex_hull`.
    """
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    if eps == 0:
        return convex_hull(f)
    m = f.nodes
    return f.with_values(_hull_with_snap(f.values, 0.5 * eps * m * m))


def second_differences(f: GridFunction) -> np.ndarray:
    v = f.values
    return v[:-2] - 2.0 * v[1:-1] + v[2:]


def is_eps_convex(f: GridFunction, eps: float, tol: float = 0.0) -> bool:
    """True when every discrete second difference is at least ``eps*h**2 - tol``.

    On a uniform grid this is equivalent to convexity of the interpolant of
    ``f - eps*m**2/2`` (up to ``tol``), hence to the three-point inequality for
    every node triple.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    if f.n < 2:
        return True
    return bool(np.all(second_differences(f) >= eps * f.h * f.h - tol))


def legendre(f: GridFunction, dual_lo: float, dual_hi: float, dual_n: int) -> GridFunction:
    """Discrete Legendre-Fenchel transform ``g(p) = max_i (x_i p - f(x_i))``.

    Only the vertices of the convex envelope can be maximisers, so the
    envelope slopes are merged against the sorted dual nodes.
    """
    if not dual_hi > dual_lo:
        raise ValueError("dual_hi must exceed dual_lo")
    if dual_n < 1:
        raise ValueError("dual_n must be >= 1")
    x = f.nodes
    y = f.values
    idx = lower_hull_indices(y)
    xv, yv = x[idx], y[idx]
    slopes = np.diff(yv) / np.diff(xv)
    p = np.linspace(dual_lo, dual_hi, dual_n + 1)
    k = np.searchsorted(slopes, p, side="left")
    return GridFunction(dual_lo, dual_hi, xv[k] * p - yv[k])


def derivative(f: GridFunction) -> GridFunction:
    """Forward difference quotients; the last node repeats the last cell slope."""
    d = np.diff(f.values) / f.h
    return f.with_values(np.append(d, d[-1]))


def quantile_pl(xs, ys, targets) -> np.ndarray:
    """Left-continuous inverse ``inf{x : Y(x) >= m}`` of a nondecreasing
    piecewise-linear ``Y`` through ``(xs, ys)``.

    ``m <= 0`` maps to the left end of ``{Y > 0}``, the limit from the right.
    Targets above ``ys[-1]`` clamp to ``xs[-1]``.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    m = np.atleast_1d(np.asarray(targets, dtype=float))
    out = np.empty_like(m)
    pos = m > 0.0
    k0 = np.searchsorted(ys, 0.0, side="right")
    out[~pos] = xs[max(k0 - 1, 0)]
    mp = m[pos]
    k = np.searchsorted(ys, mp, side="left")
    res = np.empty_like(mp)
    top = k >= xs.size
    res[top] = xs[-1]
    bottom = k == 0
    res[bottom] = xs[0]
    mid = ~(top | bottom)
    km = k[mid]
    y0, y1 = ys[km - 1], ys[km]
    x0, x1 = xs[km - 1], xs[km]
    res[mid] = x0 + (mp[mid] - y0) / (y1 - y0) * (x1 - x0)
    out[pos] = res
    return out


def cdf_from_quantile(ms, xq, targets) -> np.ndarray:
    """Right-continuous inverse ``sup{m : X(m) <= x}`` of a nondecreasing
    piecewise-linear ``X`` through ``(ms, xq)``; flat pieces of ``X`` become jumps."""
    ms = np.asarray(ms, dtype=float)
    xq = np.asarray(xq, dtype=float)
    x = np.atleast_1d(np.asarray(targets, dtype=float))
    k = np.searchsorted(xq, x, side="right")
    out = np.empty_like(x)
    out[k == 0] = ms[0]
    out[k >= xq.size] = ms[-1]
    mid = (k > 0) & (k < xq.size)
    km = k[mid]
    x0, x1 = xq[km - 1], xq[km]
    out[mid] = ms[km - 1] + (x[mid] - x0) / (x1 - x0) * (ms[km] - ms[km - 1])
    return out


def generalized_inverse(M: GridFunction, range_n: int) -> GridFunction:
    """Quantile function ``X(m) = inf{x : M(x) >= m}`` sampled on ``[0, 1]``.

    ``M`` is clamped to ``[0, 1]`` and must be nondecreasing up to ``1e-12``.
    """
    if range_n < 1:
        raise ValueError("range_n must be >= 1")
    dm = np.diff(M.values)
    if np.any(dm < -1e-12):
        i = int(np.argmin(dm))
        raise ValueError(f"M is not monotone: decreases by {-dm[i]:.3e} at node {i}")
    ys = np.maximum.accumulate(np.clip(M.values, 0.0, 1.0))
    if ys[-1] < 1.0 - 1e-9:
        raise ValueError(f"M must reach 1 on its interval, max is {ys[-1]!r}")
    m = np.linspace(0.0, 1.0, range_n + 1)
    return GridFunction(0.0, 1.0, quantile_pl(M.nodes, ys, m))


@dataclass(frozen=True)
class ClusterDecomposition:
    """Grid version of the cluster/exposed partition of ``[0, 1]``.

    ``clusters`` holds open index intervals ``(a, b)``: nodes ``a+1 .. b-1``
    are cluster nodes, ``a`` and ``b`` are the bounding exposed nodes.
    """

    clusters: tuple[tuple[int, int], ...]
    exposed: np.ndarray
    tol: float
    n: int

    @property
    def cluster_mask(self) -> np.ndarray:
        mask = np.zeros(self.n + 1, dtype=bool)
        for a, b in self.clusters:
            mask[a + 1 : b] = True
        return mask

    @property
    def exposed_mask(self) -> np.ndarray:
        return ~self.cluster_mask


def default_tol(psi: GridFunction) -> float:
    """Kink/contact tolerance: well under the curvature signal ``h**2`` yet far
    above rounding noise."""
    scale = max(1.0, psi.sup_norm())
    return max(1e-3 * psi.h * psi.h, 1e-13) * scale


def cluster_decomposition(psi: GridFunction, eps: float, tol: float | None = None) -> ClusterDecomposition:
    """Split the nodes into cluster nodes and exposed nodes.

    An interior node is a cluster node when the eps-hull of ``psi`` lies
    strictly below ``psi`` there, or when the hull is locally an eps-parabola
    (second difference equal to ``eps*h**2`` within ``tol``).  End nodes are
    always exposed.
    """
    if tol is None:
        tol = default_tol(psi)
    hull = eps_convex_hull(psi, eps)
    hv = hull.values
    excess = second_differences(hull) - eps * psi.h * psi.h
    gap = psi.values - hv
    cluster = np.zeros(psi.n + 1, dtype=bool)
    cluster[1:-1] = (excess <= tol) | (gap[1:-1] > tol)
    return _decomposition_from_mask(cluster, tol)


def _decomposition_from_mask(cluster: np.ndarray, tol: float) -> ClusterDecomposition:
    n = cluster.size - 1
    padded = np.concatenate(([False], cluster, [False])).astype(np.int8)
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    intervals = tuple((int(s) - 1, int(e) + 1) for s, e in zip(starts, ends))
    exposed = np.flatnonzero(~cluster)
    exposed.setflags(write=False)
    return ClusterDecomposition(intervals, exposed, float(tol), n)


def parabola_splice(f: GridFunction, i1: int, i2: int, eps: float, tol: float | None = None) -> GridFunction:
    """Replace ``f`` strictly between nodes ``i1`` and ``i2`` by the eps-parabola
    through its values there.  The result stays eps-convex."""
    if not 0 <= i1 < i2 <= f.n:
        raise ValueError(f"need 0 <= i1 < i2 <= n, got {i1}, {i2}")
    if tol is None:
        tol = default_tol(f)
    if not is_eps_convex(f, eps, tol):
        raise ValueError("parabola_splice requires an eps-convex input")
    if i2 == i1 + 1:
        return f
    x = f.nodes
    par = EpsParabola(eps, x[i1], f.values[i1], x[i2], f.values[i2])
    out = f.values.copy()
    out[i1 + 1 : i2] = par(x[i1 + 1 : i2])
    return f.with_values(out)
