import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from latmult.fourier import (
    GridTooSmallError,
    TorusGrid,
    TorusSamples,
    convolve,
    convolve_direct,
    forward_dft,
    grid_for,
    inverse_dft,
    periodic_inverse_dft,
    torus_lp_norm,
    transform_at,
)
from latmult.lattice import GridFunction, LatticeBox, lp_norm, max_abs_diff

from strategies import functions


def test_grid_layout():
    g = TorusGrid.uniform(8, 1)
    assert np.allclose(g.xi_axis(0), [0, 1 / 8, 2 / 8, 3 / 8, 4 / 8, -3 / 8, -2 / 8, -1 / 8])
    assert g.period_box() == LatticeBox((-3,), (4,))
    with pytest.raises(ValueError):
        TorusGrid((7,))


def test_transform_sign_convention():
    # F delta_1 (xi) = e^{+2 pi i xi}
    f = GridFunction.delta(1, 1)
    assert transform_at(f, 0.125) == pytest.approx(np.exp(2j * np.pi * 0.125), abs=1e-15)


def test_grid_too_small():
    with pytest.raises(GridTooSmallError):
        forward_dft(GridFunction.zeros(LatticeBox.centered(10, 1)), TorusGrid.uniform(16, 1))


@given(functions())
def test_round_trip(f):
    grid = grid_for(f.box)
    assert max_abs_diff(inverse_dft(forward_dft(f, grid), f.box), f) <= 1e-12


@given(functions())
def test_fft_matches_direct_sum(f):
    grid = grid_for(f.box)
    u = forward_dft(f, grid)
    pts = grid.points()
    direct = transform_at(f, pts)
    assert np.abs(direct - u.values).max() <= 1e-11 * max(1.0, lp_norm(f, 1))


@given(functions())
def test_plancherel(f):
    u = forward_dft(f, grid_for(f.box))
    assert torus_lp_norm(u, 2) == pytest.approx(lp_norm(f, 2), rel=1e-12)


@given(functions(rmax=3), functions(rmax=3))
def test_convolution_theorem(f, g):
    if f.d != g.d:
        return
    h = convolve(f, g)
    assert max_abs_diff(h, convolve_direct(f, g)) <= 1e-12 * lp_norm(f, 1) * lp_norm(g, 1)
    grid = grid_for(h.box, f.box.hull(g.box))
    lhs = forward_dft(h, grid).values
    rhs = forward_dft(f, grid).values * forward_dft(g, grid).values
    assert np.abs(lhs - rhs).max() <= 1e-12 * lp_norm(f, 1) * lp_norm(g, 1)


@given(functions(rmax=3), functions(rmax=3))
def test_convolution_commutes(f, g):
    if f.d != g.d:
        return
    assert max_abs_diff(convolve(f, g), convolve(g, f)) <= 1e-12 * lp_norm(f, 1) * lp_norm(g, 1)


@given(functions(rmax=5))
def test_hausdorff_young(f):
    lhs = torus_lp_norm(forward_dft(f, grid_for(f.box, factor=2)), 4)
    assert lhs <= lp_norm(f, 4 / 3) * (1 + 1e-12)
    assert torus_lp_norm(forward_dft(f, grid_for(f.box)), math.inf) <= lp_norm(f, 1) * (1 + 1e-12)


def test_periodic_inverse_aliases():
    grid = TorusGrid.uniform(8, 1)
    f = GridFunction.delta(2, 1)
    back = periodic_inverse_dft(forward_dft(f, grid))
    assert back(2) == pytest.approx(1) and back.box == grid.period_box()


def test_samples_csv_round_trip(rng):
    grid = TorusGrid((4, 6))
    u = TorusSamples(grid, rng.standard_normal((4, 6)) + 1j * rng.standard_normal((4, 6)))
    back = TorusSamples.from_csv(u.to_csv(), grid)
    assert np.array_equal(back.values, u.values)
