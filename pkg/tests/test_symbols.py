import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from latmult.fourier import TorusGrid
from latmult.symbols import (
    SymbolSyntaxError,
    constant,
    exponential,
    finite_difference,
    fornberg_weights,
    imaginary_power,
    interval_indicator,
    laplacian_symbol,
    negative_power,
    parse_symbol,
    reduce_to_fundamental,
    rescaled_interval,
    riesz,
    smooth_step,
    wave_cos,
    wave_sinc,
    wave_velocity,
)

xi1 = st.floats(-3, 3, allow_nan=False)


def points(d):
    return st.lists(st.floats(-0.5, 0.5, allow_nan=False), min_size=d, max_size=d).map(np.array)


@given(st.lists(xi1, min_size=1, max_size=20))
def test_reduce_to_fundamental(vals):
    r = reduce_to_fundamental(np.array(vals))
    assert np.all(r > -0.5) and np.all(r <= 0.5)
    assert np.allclose(np.mod(r - np.array(vals) + 0.5, 1.0), 0.5, atol=1e-9)


def test_fundamental_domain_edges():
    assert reduce_to_fundamental(np.array([-0.5, 0.5, 1.5])).tolist() == [0.5, 0.5, 0.5]


def test_smooth_step_values():
    assert smooth_step(0.0) == 0 and smooth_step(1.0) == 1 and smooth_step(0.5) == 0.5
    # b(x) = e^{-1/x}: e^{-4} / (e^{-4} + e^{-4/3})
    assert smooth_step(0.25) == pytest.approx(0.06496916912866406, rel=1e-14)


@given(st.floats(-1, 2))
def test_smooth_step_symmetry(x):
    assert 0 <= smooth_step(x) <= 1
    assert smooth_step(x) + smooth_step(1 - x) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_riesz_squares_sum_to_quarter(d, rng):
    xi = rng.uniform(-0.5, 0.5, size=(200, d))
    tot = sum(np.abs(riesz(j, d)(xi)) ** 2 for j in range(1, d + 1))
    assert np.allclose(tot, 0.25, atol=1e-15)
    assert riesz(1, d)(np.zeros(d)) == 0


def test_riesz_one_dimensional_form(rng):
    xi = rng.uniform(-0.5, 0.5, 50)
    assert np.allclose(riesz(1, 1)(xi), np.exp(-1j * np.pi * xi) * np.sign(xi) / 2, atol=1e-15)


@given(points(2), st.floats(-3, 3))
def test_imaginary_power_unimodular(xi, t):
    assert abs(imaginary_power(t, 2)(xi)) == pytest.approx(1.0, abs=1e-14)


def test_singular_conventions():
    z = np.zeros(2)
    assert wave_sinc(1.7, 2)(z) == pytest.approx(1.7)
    assert imaginary_power(0.3, 2)(z) == 1
    assert negative_power(1.0, 2)(z) == 0
    ind = interval_indicator(0.25, 0.75)
    assert ind(np.array([0.25])) == 0.5 and ind(np.array([0.75])) == 0.5 and ind(np.array([0.5])) == 1


def test_wave_symbols_are_consistent(rng):
    xi = rng.uniform(-0.5, 0.5, size=(40, 2))
    phi = 2 * np.sqrt(np.sum(np.sin(np.pi * xi) ** 2, axis=-1))
    assert np.allclose(wave_cos(0.9, 2)(xi), np.cos(0.9 * phi))
    assert np.allclose(wave_sinc(0.9, 2)(xi), np.sin(0.9 * phi) / phi)
    assert np.allclose(wave_velocity(0.9, 2)(xi), -phi * np.sin(0.9 * phi))
    assert np.allclose(laplacian_symbol(2)(xi), -phi**2)


def test_rescaled_interval_seam_is_average():
    m = rescaled_interval(0.1, 0.6, lambda x: x + 0j)
    assert m(np.array([0.0])) == pytest.approx(0.35)
    assert m(np.array([0.5])) == pytest.approx(0.35)
    assert m(np.array([0.2])) == pytest.approx(0.2)


@pytest.mark.parametrize(
    "text,d",
    [
        ("riesz:j=2", 3),
        ("exp:k=(1,-2)", 2),
        ("const:c=0.5-1j", 1),
        ("imagpow:t=0.25", 2),
        ("wavecos:t=1.5", 1),
        ("wavesinc:t=2", 2),
        ("wavevel:t=0.5", 1),
        ("negpower:r=1", 2),
        ("interval:a=0.25,b=0.75", 1),
        ("laplacian", 3),
        ("rescaled:a=0.1,b=0.6,inner=wavecos:t=1", 1),
        ("sum(riesz:j=1, product(exp:k=2, const:c=0.5))", 1),
    ],
)
def test_parser_round_trip(text, d, rng):
    m = parse_symbol(text, d)
    again = parse_symbol(m.tag, d)
    xi = rng.uniform(-0.5, 0.5, size=(64, d))
    assert np.array_equal(m(xi), again(xi))


def test_parser_algebra(rng):
    xi = rng.uniform(-0.5, 0.5, size=(32, 1))
    m = parse_symbol("sum(riesz:j=1, product(exp:k=2, const:c=0.5))", 1)
    expect = riesz(1, 1)(xi) + 0.5 * exponential(2)(xi)
    assert np.allclose(m(xi), expect, atol=1e-15)
    assert np.allclose((riesz(1, 1) + constant(1.0))(xi), riesz(1, 1)(xi) + 1)


@pytest.mark.parametrize("bad", ["riesz", "riesz:j=5", "nosuch:x=1", "sum(riesz:j=1", "exp:k=(1,2)", "riesz:j=1,k=2"])
def test_parser_errors(bad):
    with pytest.raises((SymbolSyntaxError, ValueError)):
        parse_symbol(bad, 1)


def test_fornberg_weights_exact_for_polynomials():
    offs = np.arange(-3, 4, dtype=float)
    for order in (1, 2, 3):
        w = fornberg_weights(order, offs)
        for deg in range(7):
            exact = math.factorial(deg) / math.factorial(deg - order) * 0.0 ** (deg - order) if deg >= order else 0.0
            assert np.dot(w, offs**deg) == pytest.approx(exact, abs=1e-9)


@pytest.mark.parametrize("alpha", [(1, 0), (0, 2), (1, 1), (2, 1), (1, 3)])
def test_analytic_vs_finite_difference(alpha, rng):
    m = riesz(1, 2)
    xi = rng.uniform(0.05, 0.45, size=(20, 2)) * rng.choice([-1, 1], size=(20, 2))
    a = m.derivative(alpha, xi)
    b = finite_difference(m, alpha, xi, 1e-3)
    assert np.abs(a - b).max() <= 1e-6 * max(1.0, np.abs(a).max())


def test_samples_shape():
    g = TorusGrid((8, 4))
    assert riesz(1, 2).samples(g).values.shape == (8, 4)
