"""Continuum solutions through the Lagrangian potential.

Pipeline: cumulative mass -> position quantiles -> potential ``Psi`` on the
mass grid; advance ``Psi`` with the eps-hull propagator; map back to an
Eulerian grid through the inverse of ``dPsi/dm`` and the Legendre transform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .convex import (
    cdf_from_quantile,
    cluster_decomposition,
    convex_hull,
    generalized_inverse,
    legendre,
)
from .grid import GridFunction, write_columns
from .particles import InitialData
from .propagator import PropagatorInput, flatten_velocity, propagate

# Density below which the reported velocity is set to zero.
VACUUM = 1e-12


@dataclass(frozen=True)
class LagrangianState:
    psi: GridFunction
    v_potential: GridFunction
    eps: float
    time: float = 0.0

    def to_csv(self, path) -> None:
        write_columns(path, ["m", "psi", "V"], [self.psi.nodes, self.psi.values, self.v_potential.values])


@dataclass(frozen=True)
class EulerianSolution:
    """Fields on an x-grid.  ``mass`` is the cumulative mass ``dPhi/dx``."""

    phi: GridFunction
    density: GridFunction
    velocity: GridFunction
    mass: GridFunction
    time: float

    def to_csv(self, path) -> None:
        write_columns(path, ["x", "rho", "u"], [self.density.nodes, self.density.values, self.velocity.values])

    def momentum(self) -> float:
        """``int rho u dx`` as cell masses ``dM`` times the cell velocity."""
        dM = np.diff(self.mass.values)
        return float(np.sum(dM * self.velocity.values[:-1]))


def _pl_antiderivative(f: GridFunction, x) -> np.ndarray:
    """Exact ``int_lo^x f`` for the piecewise-linear interpolant of ``f``."""
    h = f.h
    v = f.values
    at_nodes = np.concatenate(([0.0], np.cumsum(0.5 * h * (v[:-1] + v[1:]))))
    i = np.clip(np.floor((x - f.lo) / h).astype(np.intp), 0, f.n - 1)
    s = np.clip((x - f.lo) / h - i, 0.0, 1.0)
    return at_nodes[i] + h * (v[i] * s + 0.5 * (v[i + 1] - v[i]) * s * s)


def _momentum_antiderivative(M: GridFunction, u: GridFunction, x) -> np.ndarray:
    """Exact ``int_lo^x u dM`` for piecewise-linear ``M`` and ``u`` on one grid."""
    h = M.h
    rho = np.diff(M.values) / h
    a = u.values
    da = np.diff(a)
    a0 = a[:-1]
    at_nodes = np.concatenate(([0.0], np.cumsum(rho * h * (a0 + 0.5 * da))))
    i = np.clip(np.floor((x - M.lo) / h).astype(np.intp), 0, M.n - 1)
    s = np.clip((x - M.lo) / h - i, 0.0, 1.0)
    return at_nodes[i] + rho[i] * h * (a0[i] * s + 0.5 * da[i] * s * s)


def build_lagrangian(data: InitialData, n: int, eps: float | None = None) -> LagrangianState:
    """Initial potential ``Psi`` and velocity potential ``V`` on an ``n``-cell mass grid.

    With ``X`` the quantile function of the initial mass ``M`` and ``Phi`` the
    integral of ``M``, the Legendre transform is ``Psi(m) = m X(m) - Phi(X(m))``
    and ``V(m)`` is the momentum to the left of ``X(m)``.  Both are evaluated
    exactly with ``M`` taken as the interpolant of its nodal values.
    """
    if n < 16:
        raise ValueError("n must be >= 16")
    eps = data.eps if eps is None else eps
    rho = data.density
    if abs(data.total_mass - 1.0) > 1e-6:
        raise ValueError("density is not normalised")
    if eps > 0 and not rho.sup_norm() < 1.0 / eps:
        raise ValueError(f"max density {rho.sup_norm():.6g} violates the packing bound 1/eps")
    M = data.cumulative()
    X = generalized_inverse(M, n)
    x = X.values
    psi = X.nodes * x - _pl_antiderivative(M, x)
    V = _momentum_antiderivative(M, data.velocity, x)
    psi[0] = V[0] = 0.0
    return LagrangianState(X.with_values(psi), X.with_values(V), eps, 0.0)


def default_x_grid(data: InitialData, t: float) -> tuple[float, float, int]:
    """Data interval widened by ``C*t`` on both sides, same node spacing."""
    rho = data.density
    pad = int(np.ceil(data.speed_bound * t / rho.h))
    return rho.lo - pad * rho.h, rho.hi + pad * rho.h, rho.n + 2 * pad


def cumulative_breakpoints(psi: GridFunction) -> tuple[np.ndarray, np.ndarray]:
    """Breakpoints ``(x, m)`` of the cumulative mass of a Lagrangian potential.

    The position map is the cell slope of ``psi`` placed at cell midpoints,
    extended linearly over the two end half-cells.
    """
    xq = np.maximum.accumulate(np.diff(psi.values) / psi.h)
    mids = psi.nodes[:-1] + 0.5 * psi.h
    ms = np.concatenate(([psi.lo], mids, [psi.hi]))
    if xq.size > 1:
        first = xq[0] - 0.5 * (xq[1] - xq[0])
        last = xq[-1] + 0.5 * (xq[-1] - xq[-2])
    else:
        first = last = xq[0]
    xqe = np.concatenate(([first], xq, [last]))
    return xqe, ms


def to_eulerian(
    psi: GridFunction,
    v_potential: GridFunction,
    eps: float,
    t: float,
    x_grid: tuple[float, float, int],
) -> EulerianSolution:
    """Eulerian fields of a Lagrangian state.

    The cumulative mass is the right-continuous inverse of the piecewise-linear
    position map through the cell-midpoint slopes of ``psi``.  The velocity is
    the slope of ``V`` flattened over the clusters of ``psi``, read at the
    local mass coordinate.
    """
    lo, hi, nx = x_grid
    phi = legendre(psi, lo, hi, nx)
    hm = psi.h
    mids = psi.nodes[:-1] + 0.5 * hm
    xqe, ms = cumulative_breakpoints(psi)
    x = phi.nodes
    M = cdf_from_quantile(ms, xqe, x)
    mass = phi.with_values(M)
    hx = phi.h
    rho = np.maximum(np.diff(M) / hx, 0.0)
    rho = np.append(rho, rho[-1])

    decomp = cluster_decomposition(psi, eps)
    vt = np.diff(flatten_velocity(v_potential, decomp).values) / hm
    m_cell = np.append(0.5 * (M[:-1] + M[1:]), M[-1])
    u = np.interp(m_cell, mids, vt)
    u = np.where(rho < VACUUM, 0.0, u)
    return EulerianSolution(phi, phi.with_values(rho), phi.with_values(u), mass, float(t))


def solve_finite_size(
    data: InitialData,
    t: float,
    n: int,
    x_grid: tuple[float, float, int] | None = None,
) -> EulerianSolution:
    """Continuum limit of finite-size sticky particles at time ``t``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    state = build_lagrangian(data, n)
    psi_t = propagate(PropagatorInput(state.psi, state.v_potential, state.eps), t)
    return to_eulerian(psi_t, state.v_potential, state.eps, t, x_grid or default_x_grid(data, t))


def lagrangian_at(data: InitialData, t: float, n: int) -> LagrangianState:
    state = build_lagrangian(data, n)
    psi_t = propagate(PropagatorInput(state.psi, state.v_potential, state.eps), t)
    return LagrangianState(psi_t, state.v_potential, state.eps, float(t))


def solve_zero_pressure(
    data: InitialData,
    t: float,
    n: int,
    x_grid: tuple[float, float, int] | None = None,
) -> EulerianSolution:
    """Point-particle (``eps = 0``) solution: ``Psi(t) = conv(Psi0 + t V0)``.

    Atoms show up as spikes of height ``mass / h`` in the density, so compare
    these solutions through ``mass`` rather than pointwise.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    state = build_lagrangian(data, n, eps=0.0)
    psi_t = convex_hull(state.psi + t * state.v_potential)
    return to_eulerian(psi_t, state.v_potential, 0.0, t, x_grid or default_x_grid(data, t))
