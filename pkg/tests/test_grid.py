import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from stickyhull.grid import GridFunction, cumulative_trapezoid, read_columns, write_columns

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_nodes_and_spacing():
    f = GridFunction(0.0, 2.0, np.zeros(5))
    assert f.n == 4
    assert f.h == 0.5
    np.testing.assert_array_equal(f.nodes, [0, 0.5, 1, 1.5, 2])
    assert f.node(3) == 1.5


@pytest.mark.parametrize(
    "lo,hi,values",
    [(1.0, 0.0, [0, 1]), (0.0, 1.0, [1.0]), (0.0, 1.0, [0, np.nan]), (0.0, 1.0, [[0, 1], [1, 2]])],
)
def test_rejects_invalid(lo, hi, values):
    with pytest.raises(ValueError):
        GridFunction(lo, hi, values)


def test_values_are_immutable_copies():
    raw = np.arange(4.0)
    f = GridFunction(0, 1, raw)
    raw[0] = 99
    assert f.values[0] == 0
    with pytest.raises(ValueError):
        f.values[1] = 3


def test_arithmetic_requires_same_grid():
    f = GridFunction(0, 1, [0, 1, 2])
    g = GridFunction(0, 2, [0, 1, 2])
    with pytest.raises(ValueError, match="grid mismatch"):
        f + g
    np.testing.assert_array_equal((2 * f - f).values, f.values)


def test_interpolant_is_piecewise_linear():
    f = GridFunction(0, 1, [0.0, 1.0, 0.0])
    assert f(0.25) == 0.5
    assert f(-1.0) == 0.0


@given(arrays(float, st.integers(2, 40), elements=finite))
def test_trapezoid_matches_manual_sum(v):
    f = GridFunction(0.0, 1.0, v)
    F = cumulative_trapezoid(f)
    h = f.h
    for k in range(f.n + 1):
        assert F.values[k] == pytest.approx(sum(0.5 * h * (v[i] + v[i + 1]) for i in range(k)), abs=1e-9)


@settings(max_examples=30)
@given(arrays(float, st.integers(2, 30), elements=finite))
def test_csv_round_trip_is_exact(tmp_path_factory, v):
    path = tmp_path_factory.mktemp("csv") / "f.csv"
    f = GridFunction(-1.0, 3.0, v)
    f.to_csv(path)
    g = GridFunction.from_csv(path)
    assert g.lo == f.lo and g.hi == f.hi
    np.testing.assert_array_equal(g.values, f.values)


def test_csv_header_and_columns(tmp_path):
    path = tmp_path / "cols.csv"
    write_columns(path, ["x", "rho", "u"], [[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]])
    assert path.read_text().splitlines()[0] == "x,rho,u"
    header, cols = read_columns(path)
    assert header == ["x", "rho", "u"]
    np.testing.assert_array_equal(cols[2], [4.0, 5.0])
    assert not [p for p in tmp_path.iterdir() if p.name.startswith(".")]
