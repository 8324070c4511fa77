"""Sticky finite-size particle dynamics via epsilon-convex hulls."""

__version__ = "0.1.0"

from .grid import GridFunction
from .convex import (
    ClusterDecomposition,
    EpsParabola,
    cluster_decomposition,
    convex_hull,
    derivative,
    eps_convex_hull,
    generalized_inverse,
    is_eps_convex,
    legendre,
    parabola_splice,
)
from .propagator import PropagatorInput, evolve_schedule, flatten_velocity, propagate
from .particles import (
    Cluster,
    InitialData,
    ParticleSystem,
    SimulationError,
    advance_to,
    init_particles,
    merge,
    next_collision,
    phi_tilde,
    psi_tilde,
)
from .continuum import (
    EulerianSolution,
    LagrangianState,
    build_lagrangian,
    solve_finite_size,
    solve_zero_pressure,
    to_eulerian,
)
from .presets import PRESETS, make_preset
from .harness import (
    ComparisonReport,
    ConfigError,
    RunConfig,
    compare_engines,
    convergence_study,
    eps_sweep,
)
