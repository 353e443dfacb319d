import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from latmult.lattice import GridFunction, LatticeBox, combine, linear_sum, lp_norm, max_abs_diff, translate

from strategies import functions


def test_box_basics():
    b = LatticeBox.centered((2, 3))
    assert b.shape == (5, 7) and b.size == 35 and b.radii == (2, 3)
    assert b.contains((2, -3)) and not b.contains((3, 0))
    assert b.index((-2, -3)) == 0
    assert b.shift((1, 1)).lo == (-1, -2)
    assert b.expand(1).shape == (7, 9)
    assert LatticeBox.centered(1, 2).minkowski(LatticeBox.centered(2, 2)) == LatticeBox.centered(3, 2)
    with pytest.raises(ValueError):
        LatticeBox((0,), (-1,))


def test_delta_and_evaluation():
    f = GridFunction.delta((1, -2), box=LatticeBox.centered(3, 2))
    assert f((1, -2)) == 1 and f((0, 0)) == 0 and f((9, 9)) == 0


def test_lp_norms_closed_form():
    f = GridFunction(LatticeBox.centered(1, 1), [3.0, -4.0, 0.0])
    assert lp_norm(f, 1) == 7.0
    assert lp_norm(f, 2) == 5.0
    assert lp_norm(f, math.inf) == 4.0
    assert lp_norm(f, 3) == pytest.approx((27 + 64) ** (1 / 3), rel=1e-15)
    with pytest.raises(ValueError):
        lp_norm(f, 0.5)


def test_translate_convention():
    f = GridFunction.delta(0, 1)
    g = translate(f, 3)  # g(k) = f(k + 3)
    assert g(-3) == 1 and g(3) == 0


@given(functions(), st.floats(1, 6))
def test_norm_translation_invariance(f, p):
    g = translate(f, [2] * f.d)
    assert lp_norm(g, p) == pytest.approx(lp_norm(f, p), rel=1e-14)


@given(functions(d=2), functions(d=2))
def test_combine_is_pointwise(f, g):
    h = combine(2.0, f, -1j, g)
    box = f.box.hull(g.box)
    expect = 2.0 * f.on(box).values - 1j * g.on(box).values
    assert np.allclose(h.on(box).values, expect, atol=0, rtol=0)
    assert max_abs_diff(linear_sum([(2.0, f), (-1j, g)]), h) == 0


@given(functions())
def test_csv_and_json_round_trip(f):
    assert max_abs_diff(GridFunction.from_csv(f.to_csv()), f) == 0
    assert max_abs_diff(GridFunction.from_json(f.to_json()), f) == 0


@given(functions(), functions())
def test_minkowski_norm_triangle(f, g):
    if f.d != g.d:
        return
    assert lp_norm(f + g, 2) <= lp_norm(f, 2) + lp_norm(g, 2) + 1e-12


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        combine(1, GridFunction.delta(0, 1), 1, GridFunction.delta(0, 2))
