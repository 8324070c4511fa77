"""Run configuration and the cross-engine validation studies."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .continuum import (
    EulerianSolution,
    build_lagrangian,
    cumulative_breakpoints,
    default_x_grid,
    solve_finite_size,
    solve_zero_pressure,
)
from .grid import GridFunction, read_columns
from .metrics import loglog_slope, sup_distance, w1_distance
from .particles import (
    InitialData,
    advance_to,
    init_particles,
    mass_breakpoints,
    phi_tilde,
    psi_tilde,
    velocity_potential,
)
from .presets import PRESETS, make_preset
from .propagator import PropagatorInput, propagate

MODES = ("simulate", "solve", "solve-zp", "compare", "converge", "eps-sweep")

# Per-mode defaults; fields listed in _REQUIRED have none.
_DEFAULTS = {
    "simulate": dict(initial="random-bump", N=128, t_final=1.0),
    "solve": dict(initial="random-bump", t_final=1.0),
    "solve-zp": dict(initial="random-bump", t_final=1.0, eps=0.0),
    "compare": dict(initial="random-bump", N=128, eps=0.5, t_final=2.0),
    "converge": dict(initial="two-block-headon", eps=0.5, t_final=2.0, grid_n=8192),
    "eps-sweep": dict(initial="narrow-headon", t_final=1.5),
}
_REQUIRED = {"simulate": ("eps",), "solve": ("eps",)}


class ConfigError(ValueError):
    """Invalid or incomplete run configuration; the message names the field."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class RunConfig:
    mode: str
    initial: str | None = None
    N: int | None = None
    eps: float | None = None
    t_final: float | None = None
    times: list[float] | None = None
    grid_n: int | None = None
    out_dir: str = "out"
    seed: int = 0
    n_values: list[int] = field(default_factory=lambda: [64, 128, 256, 512, 1024, 2048])
    eps_values: list[float] = field(default_factory=lambda: [0.1, 0.05, 0.025])

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown config field")
        if "mode" not in d:
            raise ConfigError("mode", "missing")
        return cls(**d)

    def resolved(self) -> "RunConfig":
        """Fill mode defaults for unset fields and validate."""
        if self.mode not in MODES:
            raise ConfigError("mode", f"must be one of {', '.join(MODES)}")
        for name in _REQUIRED.get(self.mode, ()):
            if getattr(self, name) is None:
                raise ConfigError(name, f"required in {self.mode} mode")
        d = asdict(self)
        defaults = {"grid_n": 4096, **_DEFAULTS[self.mode]}
        for k, v in defaults.items():
            if d[k] is None:
                d[k] = v
        cfg = RunConfig(**d)
        cfg._validate()
        return cfg

    def _validate(self) -> None:
        n = self.grid_n
        if not isinstance(n, int) or n < 2**6 or n > 2**20 or n & (n - 1):
            raise ConfigError("grid_n", "must be a power of two between 2**6 and 2**20")
        if self.eps is not None and self.eps < 0:
            raise ConfigError("eps", "must be nonnegative")
        if self.mode in ("simulate", "compare") and (self.N is None or self.N < 1):
            raise ConfigError("N", "must be a positive integer")
        if self.t_final is not None and self.t_final < 0:
            raise ConfigError("t_final", "must be nonnegative")
        if self.times is not None:
            if any(t < 0 for t in self.times) or any(b <= a for a, b in zip(self.times, self.times[1:])):
                raise ConfigError("times", "must be nonnegative and strictly increasing")
        if self.mode == "converge":
            if not self.n_values or any(k < 1 or k & (k - 1) for k in self.n_values):
                raise ConfigError("n_values", "must be powers of two")
        if self.mode == "eps-sweep" and (not self.eps_values or min(self.eps_values) <= 0):
            raise ConfigError("eps_values", "must be positive")

    @property
    def schedule(self) -> list[float]:
        return list(self.times) if self.times else [float(self.t_final)]


def load_initial(source: str, eps: float, n: int, seed: int) -> InitialData:
    """Preset by name, or a CSV file with columns ``x,rho,u``."""
    try:
        if source in PRESETS:
            return make_preset(source, eps, n, seed)
        header, cols = read_columns(source)
        if [h.strip() for h in header[:3]] != ["x", "rho", "u"]:
            raise ValueError(f"expected header x,rho,u, got {','.join(header)}")
        x = cols[0]
        return InitialData(GridFunction(x[0], x[-1], cols[1]), GridFunction(x[0], x[-1], cols[2]), eps)
    except (OSError, ValueError) as exc:
        raise ConfigError("initial", str(exc)) from exc


@dataclass(frozen=True)
class ComparisonReport:
    time: float
    sup_psi: float
    w1: float
    sup_cumulative: float
    n_collisions: int
    runtime_ms: dict


def compare_engines(config: RunConfig) -> list[ComparisonReport]:
    """Particle simulator against the propagator at every scheduled time.

    Both start from the same N-particle state: the simulator's potential at
    ``t = 0`` and the exact velocity potential of the particles.
    """
    cfg = config
    n = cfg.grid_n
    data = load_initial(cfg.initial, cfg.eps, n, cfg.seed)
    sim = init_particles(data, cfg.N)
    psi0 = psi_tilde(sim, n)
    inp = PropagatorInput(psi0, velocity_potential(sim, n), cfg.eps)
    reports = []
    for t in cfg.schedule:
        t0 = time.perf_counter()
        advance_to(sim, t)
        psi_sim = psi_tilde(sim, n)
        t1 = time.perf_counter()
        psi_prop = propagate(inp, t)
        t2 = time.perf_counter()
        xs, ms = mass_breakpoints(sim)
        xp, mp = cumulative_breakpoints(psi_prop)
        reports.append(
            ComparisonReport(
                time=float(t),
                sup_psi=float(np.max(np.abs(psi_sim.values - psi_prop.values))),
                w1=w1_distance(xs, ms, xp, mp),
                sup_cumulative=sup_distance(xs, ms, xp, mp),
                n_collisions=len(sim.collision_log),
                runtime_ms={"simulator": 1e3 * (t1 - t0), "propagator": 1e3 * (t2 - t1)},
            )
        )
    return reports


def convergence_study(config: RunConfig) -> tuple[list[tuple[int, float]], float]:
    """Sup distance between the simulator's integrated cumulative mass and the
    continuum one, for each N; returns rows and the fitted log-log slope."""
    cfg = config
    data = load_initial(cfg.initial, cfg.eps, cfg.grid_n, cfg.seed)
    sol = solve_finite_size(data, cfg.t_final, cfg.grid_n)
    x = sol.phi.nodes
    rows = []
    for N in cfg.n_values:
        sim = advance_to(init_particles(data, N), cfg.t_final)
        rows.append((int(N), float(np.max(np.abs(phi_tilde(sim, x) - sol.phi.values)))))
    return rows, loglog_slope([r[0] for r in rows], [r[1] for r in rows])


def eps_sweep(config: RunConfig) -> list[tuple[float, float, float]]:
    """``L1`` distance between finite-size and zero-pressure cumulative masses.

    Rows are ``(eps, distance, 3 * (eps + h))`` with ``h`` the coarser of the
    mass and space grid spacings.
    """
    cfg = config
    t = cfg.t_final
    n = cfg.grid_n
    base = load_initial(cfg.initial, 0.0, n, cfg.seed)
    grid = default_x_grid(base, t)
    zp = solve_zero_pressure(base, t, n, grid)
    h = max(1.0 / n, (grid[1] - grid[0]) / grid[2])
    rows = []
    for eps in cfg.eps_values:
        try:
            data = base.with_eps(eps)
        except ValueError as exc:
            raise ConfigError("eps_values", str(exc)) from exc
        sol = solve_finite_size(data, t, n, grid)
        d = w1_distance(sol.mass.nodes, sol.mass.values, zp.mass.nodes, zp.mass.values)
        rows.append((float(eps), d, 3.0 * (eps + h)))
    return rows


def simulate(config: RunConfig):
    cfg = config
    data = load_initial(cfg.initial, cfg.eps, cfg.grid_n, cfg.seed)
    return advance_to(init_particles(data, cfg.N), cfg.t_final), data


def solve(config: RunConfig, zero_pressure: bool = False) -> tuple[EulerianSolution, InitialData]:
    cfg = config
    data = load_initial(cfg.initial, cfg.eps, cfg.grid_n, cfg.seed)
    if zero_pressure:
        return solve_zero_pressure(data, cfg.t_final, cfg.grid_n), data
    return solve_finite_size(data, cfg.t_final, cfg.grid_n), data


__all__ = [
    "MODES", "ConfigError", "RunConfig", "ComparisonReport", "load_initial",
    "compare_engines", "convergence_study", "eps_sweep", "simulate", "solve",
    "build_lagrangian",
]
