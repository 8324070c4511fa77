import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import random_eps_convex
from stickyhull.convex import (
    EpsParabola,
    cluster_decomposition,
    is_eps_convex,
    parabola_splice,
)
from stickyhull.grid import GridFunction, cumulative_trapezoid
from stickyhull.propagator import PropagatorInput, evolve_schedule, flatten_velocity, propagate

seeds = st.integers(0, 2**32 - 1)


def random_case(seed, n=256, eps=0.5):
    """eps-convex potential with a spliced cluster and a smooth bounded velocity."""
    rng = np.random.default_rng(seed)
    _, v = random_eps_convex(rng, n, eps)
    psi = GridFunction(0.0, 1.0, v)
    i1 = int(rng.integers(1, n // 2))
    psi = parabola_splice(psi, i1, i1 + int(rng.integers(2, n // 2)), eps)
    k = np.arange(1, 4)
    amp, phase = rng.normal(size=3), rng.uniform(0, 2 * np.pi, 3)
    vel = GridFunction.sample(lambda m: np.sin(np.outer(m, 2 * np.pi * k) + phase) @ amp, 0, 1, n)
    return PropagatorInput(psi, cumulative_trapezoid(vel), eps)


def test_input_validation():
    psi = GridFunction.sample(lambda m: m * m, 0, 1, 16)
    V = GridFunction.sample(lambda m: m, 0, 1, 16)
    with pytest.raises(ValueError, match="eps-convex"):
        PropagatorInput(psi, V, 5.0)
    with pytest.raises(ValueError, match="grid"):
        PropagatorInput(psi, GridFunction.sample(lambda m: m, 0, 1, 8), 0.5)
    with pytest.raises(ValueError):
        PropagatorInput(psi, V, -1.0)
    with pytest.raises(ValueError):
        propagate(PropagatorInput(psi, V, 0.5), -0.1)


# --- flattening ----------------------------------------------------------


def test_flatten_without_clusters_is_identity():
    psi = GridFunction.sample(lambda m: m * m, 0, 1, 64)
    V = GridFunction.sample(np.sin, 0, 1, 64)
    d = cluster_decomposition(psi, 0.5)
    assert flatten_velocity(V, d).values is V.values


def test_flatten_linear_is_identity():
    eps = 0.5
    psi = GridFunction.sample(lambda m: 0.5 * eps * m * m, 0, 1, 64)
    V = GridFunction(0.0, 1.0, 0.25 * np.arange(65))
    np.testing.assert_array_equal(flatten_velocity(V, cluster_decomposition(psi, eps)).values, V.values)


def test_flatten_one_cluster_is_chord():
    eps, n = 0.5, 200
    psi = GridFunction.sample(lambda m: 0.5 * (eps + 1) * m * m, 0, 1, n)
    psi = parabola_splice(psi, 50, 150, eps)
    d = cluster_decomposition(psi, eps)
    (a, b), = d.clusters
    V = GridFunction.sample(lambda m: m * m, 0, 1, n)
    got = flatten_velocity(V, d).values
    x = V.nodes
    chord = x[a] ** 2 + (x[b] ** 2 - x[a] ** 2) * (x - x[a]) / (x[b] - x[a])
    np.testing.assert_allclose(got[a : b + 1], chord[a : b + 1], atol=1e-14)
    np.testing.assert_array_equal(got[: a + 1], V.values[: a + 1])
    np.testing.assert_array_equal(got[b:], V.values[b:])


def test_flatten_rejects_wrong_grid():
    psi = GridFunction.sample(lambda m: m * m, 0, 1, 64)
    with pytest.raises(ValueError):
        flatten_velocity(GridFunction.sample(np.sin, 0, 1, 32), cluster_decomposition(psi, 0.5))


# --- propagation ---------------------------------------------------------


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_zero_time_is_identity(seed):
    inp = random_case(seed)
    np.testing.assert_array_equal(propagate(inp, 0.0).values, inp.psi.values)


@settings(max_examples=20, deadline=None)
@given(seeds, st.floats(-3, 3), st.floats(0, 5))
def test_uniform_velocity_is_linear_shift(seed, v0, t):
    base = random_case(seed)
    V = GridFunction(0.0, 1.0, v0 * base.psi.nodes)
    out = propagate(PropagatorInput(base.psi, V, base.eps), t)
    np.testing.assert_array_equal(out.values, (base.psi + t * V).values)


def test_zero_velocity_keeps_state():
    inp = random_case(3)
    zero = PropagatorInput(inp.psi, inp.v_potential * 0.0, inp.eps)
    for state in evolve_schedule(zero, [0.5, 1.0, 2.0]):
        np.testing.assert_array_equal(state.values, inp.psi.values)


def test_two_particle_head_on():
    # two particles of mass 1/2, sizes eps/2, centres -1 and 1, velocities +1 and -1
    eps, n = 0.5, 512
    m = np.linspace(0, 1, n + 1)
    nu = eps / 2
    X = np.where(m <= 0.5, -1 - nu / 2 + eps * m, 1 - nu / 2 + eps * (m - 0.5))
    psi = cumulative_trapezoid(GridFunction(0, 1, X))
    V = GridFunction(0, 1, np.where(m <= 0.5, m, 1 - m))
    out = propagate(PropagatorInput(psi, V, eps), 3.0)
    # merged at rest, centred at 0
    expected = cumulative_trapezoid(GridFunction(0, 1, -eps / 2 + eps * m)).values
    assert np.abs(out.values - expected).max() <= 10 * psi.h


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(0.01, 3))
def test_output_is_eps_convex_with_parabolic_clusters(seed, t):
    inp = random_case(seed)
    out = propagate(inp, t)
    scale = max(1.0, out.sup_norm())
    assert is_eps_convex(out, inp.eps, 1e-12 * scale)
    d = cluster_decomposition(out, inp.eps)
    for a, b in d.clusters:
        d2 = np.diff(out.values[a : b + 1], 2)
        assert np.abs(d2 - inp.eps * out.h**2).max() <= d.tol + 1e-9 * scale


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(0.01, 3))
def test_exposed_values_are_pinned(seed, t):
    inp = random_case(seed)
    out = propagate(inp, t)
    d_in = cluster_decomposition(inp.psi, inp.eps)
    free = (inp.psi + t * flatten_velocity(inp.v_potential, d_in)).values
    d_out = cluster_decomposition(out, inp.eps)
    e = d_out.exposed
    assert np.abs(out.values[e] - free[e]).max() <= d_out.tol


@settings(max_examples=20, deadline=None)
@given(seeds, st.floats(0.01, 3))
def test_exposedness_from_exposed_endpoints_only(seed, t):
    inp = random_case(seed, n=128)
    psi = propagate(inp, t)
    d = cluster_decomposition(psi, inp.eps)
    x, y, E = psi.nodes, psi.values, d.exposed
    for i in range(1, psi.n):
        left, right = E[E < i], E[E > i]
        if d.cluster_mask[i]:
            a, b = left[-1], right[0]
            par = EpsParabola(inp.eps, x[a], y[a], x[b], y[b])
            # per-cell curvature slack tol accumulates over the cluster
            assert abs(y[i] - par(x[i])) <= d.tol * (b - a) ** 2 / 8 + 1e-12
        else:
            j, k = np.meshgrid(left, right, indexing="ij")
            s = (x[k] - x[i]) / (x[k] - x[j])
            chords = s * y[j] + (1 - s) * y[k] - 0.5 * inp.eps * (x[i] - x[j]) * (x[k] - x[i])
            assert y[i] < chords.min()


# --- schedules -----------------------------------------------------------


@pytest.mark.parametrize("seed", range(5))
def test_single_time_schedule_is_propagate(seed):
    inp = random_case(seed)
    (state,) = evolve_schedule(inp, [1.3])
    np.testing.assert_array_equal(state.values, propagate(inp, 1.3).values)


@pytest.mark.parametrize("seed", range(10))
def test_half_step_semigroup(seed):
    inp = random_case(seed)
    t = 2.0
    _, last = evolve_schedule(inp, [t / 2, t])
    scale = max(1.0, inp.psi.sup_norm() + t * inp.v_potential.sup_norm())
    assert np.abs(last.values - propagate(inp, t).values).max() <= 10 * inp.psi.h * scale


@pytest.mark.parametrize("times", [[1.0, 1.0], [2.0, 1.0], [-1.0, 1.0]])
def test_schedule_rejects_bad_times(times):
    with pytest.raises(ValueError):
        evolve_schedule(random_case(0), times)


@pytest.mark.parametrize("seed", range(5))
def test_clusters_grow_along_schedule(seed):
    inp = random_case(seed)
    states = [inp.psi] + evolve_schedule(inp, np.linspace(0.25, 3.0, 12))
    masks = [cluster_decomposition(s, inp.eps).cluster_mask for s in states]
    for before, after in zip(masks, masks[1:]):
        lost = np.flatnonzero(before & ~after)
        if lost.size:
            edges = np.flatnonzero(np.diff(before.astype(int)))
            assert np.min(np.abs(lost[:, None] - edges[None, :]), axis=1).max() <= 2
