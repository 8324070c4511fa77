"""Event-driven dynamics of N identical finite-size sticky particles on a line.

Every particle has size ``nu = eps / N`` and mass ``1 / N`` (density
``1 / eps``).  Particles move ballistically; adjacent clusters that touch
while approaching merge into a rigid cluster whose velocity conserves
momentum.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .convex import generalized_inverse, quantile_pl
from .grid import GridFunction, cumulative_trapezoid


class SimulationError(RuntimeError):
    """Raised when the event loop reaches a state that should be impossible."""


@dataclass(frozen=True)
class Cluster:
    left_edge: float
    size: float
    mass: float
    velocity: float
    first: int
    last: int

    @property
    def right_edge(self) -> float:
        return self.left_edge + self.size

    @property
    def count(self) -> int:
        return self.last - self.first + 1


def merge(a: Cluster, b: Cluster, tol: float | None = None) -> Cluster:
    """Stick ``b`` onto the right of ``a``, conserving mass, size and momentum."""
    if a.last + 1 != b.first:
        raise ValueError(f"clusters {a.first}..{a.last} and {b.first}..{b.last} are not adjacent")
    if tol is None:
        tol = 1e-12 * max(1.0, abs(a.left_edge), abs(b.left_edge))
    gap = b.left_edge - a.right_edge
    if abs(gap) > tol:
        raise ValueError(f"clusters are not touching (gap {gap:.3e})")
    mass = a.mass + b.mass
    return Cluster(
        left_edge=a.left_edge,
        size=a.size + b.size,
        mass=mass,
        velocity=(a.mass * a.velocity + b.mass * b.velocity) / mass,
        first=a.first,
        last=b.last,
    )


@dataclass(frozen=True)
class InitialData:
    """Initial density and velocity on a common grid, plus the particle
    compressibility ``eps`` (packing density ``1/eps``; ``eps = 0`` means point
    particles)."""

    density: GridFunction
    velocity: GridFunction
    eps: float

    def __post_init__(self):
        rho = self.density
        if not rho.same_grid(self.velocity):
            raise ValueError("density and velocity must share a grid")
        if self.eps < 0:
            raise ValueError(f"eps must be nonnegative, got {self.eps}")
        if np.any(rho.values < 0):
            raise ValueError("density must be nonnegative")
        if rho.values[0] != 0 or rho.values[-1] != 0:
            raise ValueError("density must vanish at both ends of its interval (compact support)")
        total = self.total_mass
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"density must integrate to 1, got {total!r}")
        if self.eps > 0 and not rho.sup_norm() < 1.0 / self.eps:
            raise ValueError(
                f"max density {rho.sup_norm():.6g} must stay below 1/eps = {1.0 / self.eps:.6g}"
            )

    @property
    def total_mass(self) -> float:
        return float(cumulative_trapezoid(self.density).values[-1])

    @property
    def speed_bound(self) -> float:
        return self.velocity.sup_norm()

    @property
    def support(self) -> tuple[float, float]:
        x = self.density.nodes
        pos = np.flatnonzero(self.density.values > 0)
        return float(x[pos[0] - 1]), float(x[pos[-1] + 1])

    def cumulative(self) -> GridFunction:
        """Mass to the left of each node, normalised to end at exactly 1."""
        M = cumulative_trapezoid(self.density)
        return M.with_values(M.values / M.values[-1])

    def with_eps(self, eps: float) -> "InitialData":
        return InitialData(self.density, self.velocity, eps)


class Collision(NamedTuple):
    time: float
    pairs: tuple[int, ...]


@dataclass(frozen=True)
class CollisionEvent:
    t: float
    merged: tuple[tuple[int, int], ...]

    def to_json(self) -> str:
        return json.dumps({"t": self.t, "merged": [list(r) for r in self.merged]})


@dataclass(eq=False)
class ParticleSystem:
    """Ordered clusters of identical particles (1-based particle indices).

    State is stored column-wise; ``clusters`` materialises :class:`Cluster`
    records on demand.
    """

    left: np.ndarray
    velocity: np.ndarray
    first: np.ndarray
    last: np.ndarray
    n_particles: int
    eps: float
    time: float = 0.0
    collision_log: list[CollisionEvent] = field(default_factory=list)

    @classmethod
    def from_particles(cls, centers, velocities, eps: float) -> "ParticleSystem":
        centers = np.asarray(centers, dtype=float)
        velocities = np.asarray(velocities, dtype=float)
        N = centers.size
        if N < 1 or velocities.shape != centers.shape:
            raise ValueError("need matching nonempty centers and velocities")
        if eps <= 0:
            raise ValueError("eps must be positive")
        nu = eps / N
        sys = cls(
            left=centers - 0.5 * nu,
            velocity=velocities.copy(),
            first=np.arange(1, N + 1),
            last=np.arange(1, N + 1),
            n_particles=N,
            eps=float(eps),
        )
        gaps = sys.gaps()
        if gaps.size and gaps.min() < -sys.touch_tol():
            raise ValueError("particles overlap")
        return sys

    @property
    def nu(self) -> float:
        return self.eps / self.n_particles

    @property
    def counts(self) -> np.ndarray:
        return self.last - self.first + 1

    @property
    def sizes(self) -> np.ndarray:
        return self.counts * self.nu

    @property
    def masses(self) -> np.ndarray:
        return self.counts / self.n_particles

    @property
    def right(self) -> np.ndarray:
        return self.left + self.sizes

    @property
    def n_clusters(self) -> int:
        return self.left.size

    @property
    def clusters(self) -> tuple[Cluster, ...]:
        return tuple(self._cluster(i) for i in range(self.n_clusters))

    def _cluster(self, i: int) -> Cluster:
        c = int(self.last[i] - self.first[i] + 1)
        return Cluster(
            float(self.left[i]), c * self.nu, c / self.n_particles,
            float(self.velocity[i]), int(self.first[i]), int(self.last[i]),
        )

    def copy(self) -> "ParticleSystem":
        return ParticleSystem(
            self.left.copy(), self.velocity.copy(), self.first.copy(), self.last.copy(),
            self.n_particles, self.eps, self.time, list(self.collision_log),
        )

    def gaps(self) -> np.ndarray:
        return self.left[1:] - self.right[:-1]

    def momentum(self) -> float:
        return float(np.sum(self.masses * self.velocity))

    def touch_tol(self) -> float:
        return 1e-12 * max(1.0, float(np.max(np.abs(self.left))))

    def _translate(self, t: float) -> None:
        dt = t - self.time
        if dt > 0:
            self.left = self.left + self.velocity * dt
        self.time = t

    def _merge_runs(self, pairs) -> list[tuple[int, int]]:
        """Merge every run of adjacent pairs ``(i, i+1)``; return merged index ranges."""
        pairs = sorted(set(int(p) for p in pairs))
        runs: list[list[int]] = []
        for p in pairs:
            if runs and runs[-1][1] == p:
                runs[-1][1] = p + 1
            else:
                runs.append([p, p + 1])
        keep = np.ones(self.n_clusters, dtype=bool)
        tol = self.touch_tol()
        merged = []
        for s, e in runs:
            c = self._cluster(s)
            for j in range(s + 1, e + 1):
                c = merge(c, self._cluster(j), tol)
            self.velocity[s] = c.velocity
            self.last[s] = c.last
            keep[s + 1 : e + 1] = False
            merged.append((c.first, c.last))
        self.left = self.left[keep]
        self.velocity = self.velocity[keep]
        self.first = self.first[keep]
        self.last = self.last[keep]
        return merged

    def to_jsonl(self) -> str:
        return "".join(ev.to_json() + "\n" for ev in self.collision_log)


def init_particles(data: InitialData, N: int) -> ParticleSystem:
    """Place ``N`` particles at the mid-quantiles of the initial mass.

    Particle ``i`` is centred where the cumulative mass equals
    ``(i - 1/2) / N``; overlaps are repaired by minimal right shifts, and
    velocities are read at the unshifted centres.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if data.eps <= 0:
        raise ValueError("finite-size particles need eps > 0")
    lo, hi = data.support
    if data.eps > (hi - lo) + 2 * data.density.h:
        raise ValueError(
            f"N*nu = eps = {data.eps} exceeds the support length {hi - lo:.6g}"
        )
    quantiles = generalized_inverse(data.cumulative(), 2 * N).values[1::2]
    velocities = data.velocity(quantiles)
    nu = data.eps / N
    centers = quantiles.copy()
    for i in range(1, N):
        if centers[i] < centers[i - 1] + nu:
            centers[i] = centers[i - 1] + nu
    return ParticleSystem.from_particles(centers, velocities, data.eps)


def next_collision(sys: ParticleSystem) -> Collision | None:
    """Earliest upcoming contact among approaching neighbours, with all pairs
    that collide within ``1e-12`` (relative) of it."""
    if sys.n_clusters < 2:
        return None
    dv = sys.velocity[:-1] - sys.velocity[1:]
    approaching = dv > 0
    if not np.any(approaching):
        return None
    gaps = np.maximum(sys.gaps(), 0.0)
    dt = np.full(dv.shape, np.inf)
    dt[approaching] = gaps[approaching] / dv[approaching]
    tmin = float(dt.min())
    group = np.flatnonzero(dt <= tmin + 1e-12 * max(1.0, tmin))
    return Collision(sys.time + tmin, tuple(int(i) for i in group))


def advance_to(sys: ParticleSystem, t: float) -> ParticleSystem:
    """Run the event loop up to time ``t`` (in place) and return ``sys``."""
    if t < sys.time:
        raise ValueError(f"cannot advance backwards from {sys.time} to {t}")
    while True:
        nxt = next_collision(sys)
        if nxt is None or nxt.time > t:
            break
        sys._translate(nxt.time)
        merged = sys._merge_runs(nxt.pairs)
        # contacts created by the merge at the same instant
        while sys.n_clusters > 1:
            tol = sys.touch_tol()
            dv = sys.velocity[:-1] - sys.velocity[1:]
            extra = np.flatnonzero((sys.gaps() <= tol) & (dv > 0))
            if extra.size == 0:
                break
            merged = merged + sys._merge_runs(extra)
        merged = _outermost(merged)
        sys.collision_log.append(CollisionEvent(sys.time, tuple(merged)))
        if len(sys.collision_log) > sys.n_particles - 1:
            raise SimulationError(
                f"{len(sys.collision_log)} collision events for {sys.n_particles} particles"
            )
    sys._translate(t)
    return sys


def _outermost(ranges):
    """Drop ranges contained in another range; sort by first index."""
    ranges = sorted(set(ranges), key=lambda r: (r[0], -r[1]))
    out = []
    for r in ranges:
        if out and r[1] <= out[-1][1]:
            continue
        out.append(r)
    return out


def _locate(sys: ParticleSystem, x: np.ndarray) -> np.ndarray:
    return np.searchsorted(sys.left, x, side="right") - 1


def density_profile(sys: ParticleSystem, lo: float, hi: float, n: int) -> GridFunction:
    """``1/eps`` inside clusters and 0 elsewhere, sampled at grid nodes."""
    x = np.linspace(lo, hi, n + 1)
    k = _locate(sys, x)
    kk = np.clip(k, 0, None)
    inside = (k >= 0) & (x <= sys.right[kk])
    return GridFunction(lo, hi, np.where(inside, 1.0 / sys.eps, 0.0))


def velocity_profile(sys: ParticleSystem, lo: float, hi: float, n: int) -> GridFunction:
    """Cluster velocity inside clusters and 0 elsewhere, sampled at grid nodes."""
    x = np.linspace(lo, hi, n + 1)
    k = _locate(sys, x)
    kk = np.clip(k, 0, None)
    inside = (k >= 0) & (x <= sys.right[kk])
    return GridFunction(lo, hi, np.where(inside, sys.velocity[kk], 0.0))


def _mass_edges(sys: ParticleSystem) -> np.ndarray:
    """Cumulative mass at the left edge of each cluster, plus the total (1)."""
    return np.concatenate(([0], np.cumsum(sys.counts))) / sys.n_particles


def mass_breakpoints(sys: ParticleSystem) -> tuple[np.ndarray, np.ndarray]:
    """Breakpoints ``(x, M)`` of the exact piecewise-linear cumulative mass."""
    c = _mass_edges(sys)
    xs = np.empty(2 * sys.n_clusters)
    ys = np.empty_like(xs)
    xs[0::2], xs[1::2] = sys.left, sys.right
    ys[0::2], ys[1::2] = c[:-1], c[1:]
    return xs, ys


def cumulative_mass(sys: ParticleSystem, x) -> np.ndarray:
    xs, ys = mass_breakpoints(sys)
    return np.interp(x, xs, ys, left=0.0, right=1.0)


def phi_tilde(sys: ParticleSystem, x) -> np.ndarray:
    """Exact running integral of the cumulative mass, evaluated at ``x``."""
    x = np.asarray(x, dtype=float)
    c = _mass_edges(sys)
    size = sys.sizes
    slope = sys.masses / size
    at_right = c[:-1] * size + 0.5 * slope * size * size
    gaps = np.append(sys.gaps(), 0.0)
    at_left = np.concatenate(([0.0], np.cumsum(at_right + c[1:] * gaps)[:-1]))
    k = _locate(sys, x)
    kk = np.clip(k, 0, None)
    d = x - sys.left[kk]
    inside = d <= size[kk]
    val_in = at_left[kk] + c[kk] * d + 0.5 * slope[kk] * d * d
    val_out = at_left[kk] + at_right[kk] + c[kk + 1] * (d - size[kk])
    return np.where(k < 0, 0.0, np.where(inside, val_in, val_out))


def position_quantiles(sys: ParticleSystem, n: int) -> GridFunction:
    """Position ``X(m)`` of mass coordinate ``m`` on the ``n``-cell grid of [0, 1]."""
    xs, ys = mass_breakpoints(sys)
    m = np.linspace(0.0, 1.0, n + 1)
    return GridFunction(0.0, 1.0, quantile_pl(xs, ys, m))


def psi_tilde(sys: ParticleSystem, n: int) -> GridFunction:
    """Lagrangian potential: trapezoid integral of the position quantiles."""
    return cumulative_trapezoid(position_quantiles(sys, n))


def velocity_potential(sys: ParticleSystem, n: int) -> GridFunction:
    """Exact integral over mass of the cluster velocity, on the ``n``-cell grid."""
    c = _mass_edges(sys)
    at_edges = np.concatenate(([0.0], np.cumsum(sys.masses * sys.velocity)))
    m = np.linspace(0.0, 1.0, n + 1)
    k = np.clip(np.searchsorted(c, m, side="right") - 1, 0, sys.n_clusters - 1)
    return GridFunction(0.0, 1.0, at_edges[k] + sys.velocity[k] * (m - c[k]))
