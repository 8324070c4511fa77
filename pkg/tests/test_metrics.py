import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stickyhull.metrics import loglog_slope, sup_distance, w1_distance


def random_cdf(rng, k):
    x = np.sort(rng.uniform(-3, 3, k))
    y = np.sort(rng.uniform(0, 1, k))
    y[0], y[-1] = 0.0, 1.0
    return x, y


def test_w1_of_shifted_step_is_shift():
    x = np.array([0.0, 1.0])
    y = np.array([0.0, 1.0])
    assert w1_distance(x, y, x + 0.3, y) == pytest.approx(0.3)


def test_w1_crossing_segment_split_at_root():
    # M1 = x and M2 = 1 - x on [0, 1] cross at 1/2: area is 1/2
    assert w1_distance([0, 1], [0, 1], [0, 1], [1, 0]) == pytest.approx(0.5)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_w1_matches_quadrature(seed):
    rng = np.random.default_rng(seed)
    (x1, y1), (x2, y2) = random_cdf(rng, 6), random_cdf(rng, 9)
    # dense trapezoid: the integrand is piecewise linear, so only the few
    # kinks contribute O(ds**2) error each
    s = np.union1d(np.linspace(-3, 3, 2_000_001), np.union1d(x1, x2))
    f = np.abs(np.interp(s, x1, y1) - np.interp(s, x2, y2))
    expected = np.trapezoid(f, s)
    assert w1_distance(x1, y1, x2, y2) == pytest.approx(expected, abs=1e-9)


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_metric_axioms(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_cdf(rng, int(rng.integers(2, 12))) for _ in range(3))
    assert w1_distance(*a, *a) == 0.0
    assert w1_distance(*a, *b) == pytest.approx(w1_distance(*b, *a), abs=1e-14)
    assert w1_distance(*a, *c) <= w1_distance(*a, *b) + w1_distance(*b, *c) + 1e-12
    assert sup_distance(*a, *c) <= sup_distance(*a, *b) + sup_distance(*b, *c) + 1e-12


def test_sup_distance():
    assert sup_distance([0, 1], [0, 1], [0.5, 1.5], [0, 1]) == pytest.approx(0.5)


@pytest.mark.parametrize("p", [-2.0, -1.0, -0.5])
def test_loglog_slope_recovers_power(p):
    ns = 2.0 ** np.arange(4, 10)
    assert loglog_slope(ns, 3 * ns**p) == pytest.approx(p)
