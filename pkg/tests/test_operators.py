import numpy as np
import pytest
from hypothesis import given, strategies as st

from latmult.fourier import TorusGrid, forward_dft, grid_for
from latmult.lattice import GridFunction, LatticeBox, lp_norm, max_abs_diff
from latmult.operators import (
    DifferenceStencil,
    difference,
    imaginary_power_apply,
    imaginary_power_periodic,
    laplacian,
    laplacian_spectral,
    riesz_apply,
)

from strategies import functions


def test_difference_values():
    f = GridFunction(LatticeBox((0,), (2,)), [1.0, 4.0, 9.0])
    fwd = difference(f, 1)
    assert fwd.box == LatticeBox((-1,), (3,))
    assert fwd.values.real.tolist() == [1.0, 3.0, 5.0, -9.0, 0.0]
    bwd = difference(f, 1, "backward")
    assert bwd.values.real.tolist() == [0.0, 1.0, 3.0, 5.0, -9.0]
    with pytest.raises(ValueError):
        DifferenceStencil(1, "sideways")


@given(functions(rmax=3), functions(rmax=3), st.integers(1, 3))
def test_summation_by_parts(f, g, j):
    if f.d != g.d or j > f.d:
        return
    lhs = difference(f, j).inner(g)
    rhs = -f.inner(difference(g, j, "backward"))
    assert abs(lhs - rhs) <= 1e-12 * (1 + lp_norm(f, 2) * lp_norm(g, 2))


@given(functions(rmax=3))
def test_laplacian_factorises(f):
    total = None
    for j in range(1, f.d + 1):
        term = difference(difference(f, j), j, "backward")
        total = term if total is None else total + term
    assert max_abs_diff(laplacian(f), total) <= 1e-12


@given(functions(rmax=3))
def test_laplacian_stencil_matches_symbol(f):
    assert max_abs_diff(laplacian(f), laplacian_spectral(f)) <= 1e-11 * (1 + lp_norm(f, 1))


@given(functions(rmax=3), st.integers(1, 3))
def test_difference_symbol(f, j):
    if j > f.d:
        return
    df = difference(f, j)
    grid = grid_for(df.box)
    xi = grid.points()[..., j - 1]
    lhs = forward_dft(df, grid).values
    rhs = (np.exp(-2j * np.pi * xi) - 1) * forward_dft(f, grid).values
    assert np.abs(lhs - rhs).max() <= 1e-12 * (1 + lp_norm(f, 1))


def test_riesz_apply_delta():
    out = riesz_apply(1, GridFunction.delta(0, 1), LatticeBox.centered(3, 1), 1e-10)
    n = np.arange(-3, 4)
    assert np.abs(out.values - (-1j / (np.pi * (2 * n + 1)))).max() <= 1e-10


def test_imaginary_powers(rng):
    f = GridFunction.random(LatticeBox.centered(4, 2), rng)
    grid = TorusGrid.uniform(32, 2)
    a = imaginary_power_periodic(0.5, f, grid)
    back = imaginary_power_periodic(-0.5, a, grid)
    assert max_abs_diff(back, f.on(grid.period_box())) <= 1e-13
    g = GridFunction.random(LatticeBox.centered(3, 2), rng)
    lat = imaginary_power_apply(0.0, g, LatticeBox.centered(5, 2))
    assert max_abs_diff(lat, g.on(LatticeBox.centered(5, 2))) <= 1e-12
