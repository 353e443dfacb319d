import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from latmult.fourier import TorusGrid
from latmult.lattice import GridFunction, LatticeBox, lp_norm, max_abs_diff, translate
from latmult.multipliers import (
    KernelTable,
    NonConvergenceError,
    apply_kernel,
    apply_multiplier,
    apply_multiplier_detailed,
    apply_periodic,
    dyadic_components,
    interval_operator,
    lp_bump,
    lp_cutoff,
    modulate,
    multiplier_energy,
    partition_cutoff,
    refine,
    rescale_interval_symbol,
    subdivision_partition,
    synthesize_kernel,
)
from latmult.symbols import exponential, imaginary_power, interval_indicator, laplacian_symbol, parse_symbol, riesz

from strategies import functions


def test_riesz_kernel_frozen_values():
    # -i / (pi (2n + 1)), integrated by hand from the 1D symbol
    K = synthesize_kernel(riesz(1, 1), LatticeBox.centered(8, 1), 1e-10)
    assert K(0) == pytest.approx(-1j / np.pi, abs=1e-10)
    assert K(-1) == pytest.approx(1j / np.pi, abs=1e-10)
    assert K(3) == pytest.approx(-1j / (7 * np.pi), abs=1e-10)
    assert K.converged and K.aliasing_estimate <= 1e-10


def test_laplacian_kernel_is_the_stencil():
    K = synthesize_kernel(laplacian_symbol(2), LatticeBox.centered(2, 2), 1e-12)
    expect = np.zeros((5, 5))
    expect[2, 2] = -4
    expect[1, 2] = expect[3, 2] = expect[2, 1] = expect[2, 3] = 1
    assert np.abs(K.values - expect).max() <= 1e-13


def test_exponential_kernel_is_a_delta():
    K = synthesize_kernel(exponential((1, -2)), LatticeBox.centered(3, 2), 1e-12)
    assert max_abs_diff(K.kernel, GridFunction.delta((1, -2), box=K.box)) <= 1e-13


def test_interval_kernel_closed_form():
    # int_a^b e^{-2 pi i n xi} dxi with a = 1/4, b = 3/4
    K = synthesize_kernel(interval_indicator(0.25, 0.75), LatticeBox.centered(3, 1), 1e-11)
    assert K(0) == pytest.approx(0.5, abs=1e-10)
    assert K(1) == pytest.approx(-0.3183098861837907, abs=1e-10)
    assert K(2) == pytest.approx(0.0, abs=1e-10)
    assert K(3) == pytest.approx(0.1061032953945969, abs=1e-10)


@given(functions(d=1, rmax=5), st.integers(-4, 4))
def test_translation_covariance(f, k):
    m = parse_symbol("sum(wavecos:t=1, exp:k=1)", 1)
    W = LatticeBox.centered(12, 1)
    a = apply_multiplier(m, translate(f, k), W, 1e-11)
    b = translate(apply_multiplier(m, f, W.shift(k), 1e-11), k)
    assert max_abs_diff(a, b) <= 1e-10


@settings(max_examples=10)
@given(functions(d=2, rmax=3), functions(d=2, rmax=3), st.complex_numbers(max_magnitude=3))
def test_linearity(f, g, c):
    m = riesz(2, 2)
    W = LatticeBox.centered(6, 2)
    lhs = apply_multiplier(m, f + g * c, W, 1e-6)
    rhs = apply_multiplier(m, f, W, 1e-6) + apply_multiplier(m, g, W, 1e-6) * c
    assert max_abs_diff(lhs, rhs) <= 4e-6 * (1 + abs(c))


def test_kernel_convolution_matches_apply(rng):
    m = parse_symbol("wavesinc:t=2", 1)
    f = GridFunction.random(LatticeBox.centered(4, 1), rng)
    K = synthesize_kernel(m, LatticeBox.centered(40, 1), 1e-12)
    via_kernel = apply_kernel(K, f).on(LatticeBox.centered(10, 1))
    via_symbol = apply_multiplier(m, f, LatticeBox.centered(10, 1), 1e-12)
    assert max_abs_diff(via_kernel, via_symbol) <= 1e-11


def test_nonconvergence_is_reported():
    with pytest.raises(NonConvergenceError) as exc:
        synthesize_kernel(imaginary_power(0.5, 1), LatticeBox.centered(4, 1), 1e-13, cap=1024)
    conv = exc.value.convergence
    assert conv.N == 1024 and not conv.converged and conv.history
    K = synthesize_kernel(imaginary_power(0.5, 1), LatticeBox.centered(4, 1), 1e-13, cap=1024, accept_nonconverged=True)
    assert not K.converged and K.N == 1024


def test_refine_extrapolates_power_law():
    # value(N) = 1 + 1/N^2 converges to 1 much faster with extrapolation
    vals, conv = refine(lambda n: np.array(1.0 + 1.0 / n**2), 16, 1 << 12, 1e-12)
    assert abs(float(vals) - 1.0) <= 1e-12 and conv.extrapolated


def test_kernel_table_csv_round_trip():
    K = synthesize_kernel(riesz(1, 1), LatticeBox.centered(4, 1), 1e-9)
    back = KernelTable.from_csv(K.to_csv(), K.metadata())
    assert max_abs_diff(back.kernel, K.kernel) == 0 and back.N == K.N


@pytest.mark.parametrize("d", [1, 2])
def test_riesz_energy(d, rng):
    f = GridFunction.random(LatticeBox.centered(3, d), rng)
    tot = sum(multiplier_energy(riesz(j, d), f, 1e-9)[0] for j in range(1, d + 1))
    assert tot == pytest.approx(0.25 * lp_norm(f, 2) ** 2, rel=1e-8)


def test_periodic_imaginary_power_group(rng):
    grid = TorusGrid.uniform(32, 2)
    f = GridFunction.random(LatticeBox.centered(5, 2), rng)
    a = apply_periodic(imaginary_power(0.3, 2), apply_periodic(imaginary_power(0.4, 2), f, grid), grid)
    b = apply_periodic(imaginary_power(0.7, 2), f, grid)
    assert max_abs_diff(a, b) <= 1e-13
    assert lp_norm(b, 2) == pytest.approx(lp_norm(f, 2), rel=1e-13)


@given(st.floats(-1, 1), st.floats(0.2, 1.5))
def test_interval_operator_matches_rescaled_symbol(a, length):
    f = GridFunction.random(LatticeBox.centered(4, 1), np.random.default_rng(7))
    W = LatticeBox.centered(8, 1)
    m = parse_symbol("wavecos:t=1.5", 1)
    direct = interval_operator(m, a, a + length, f, W)
    via = apply_multiplier(rescale_interval_symbol(m, a, a + length), f, W, 1e-12)
    assert max_abs_diff(direct, via) <= 1e-10


@given(st.floats(-1, 1))
def test_modulation_identity(a):
    f = GridFunction.random(LatticeBox.centered(4, 1), np.random.default_rng(3))
    W = LatticeBox.centered(8, 1)
    m = parse_symbol("product(wavecos:t=1.5, exp:k=1)", 1)
    lhs = apply_multiplier(m, f, W, 1e-12)
    rhs = modulate(interval_operator(m, a, a + 1, modulate(f, a), W), -a)
    assert max_abs_diff(lhs, rhs) <= 1e-10


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=50))
def test_partition_sums_to_one(xs):
    pieces = subdivision_partition([0, 0.2, 0.5, 0.7, 1], 0.03)
    xi = np.array(xs)[:, None]
    assert np.allclose(sum(p(xi) for p in pieces), 1.0, atol=1e-12, rtol=0)


def test_partition_shape():
    pieces = subdivision_partition([0, 0.2, 0.5, 1], 0.05)
    assert len(pieces) == 3
    assert pieces[0](np.array([0.35])) == pytest.approx(1.0)  # far from both cutoffs
    assert pieces[1](np.array([0.2])) == pytest.approx(0.5)  # (1 - phi_1)/2 at a_1
    assert partition_cutoff(0.2, 0.05)(np.array([0.2])) == 0
    with pytest.raises(ValueError):
        subdivision_partition([0, 0.5, 1], 0.3)


def test_littlewood_paley_pieces():
    t = np.geomspace(1e-4, 0.7, 300)
    total = sum(lp_bump(2.0**j * t) for j in range(3, 20))
    mask = t >= 2.0**-18
    assert np.allclose(total[mask], lp_cutoff(t[mask]), atol=1e-14)
    grid = TorusGrid.uniform(64, 2)
    pieces = dyadic_components(riesz(1, 2), 6, grid)
    assert len(pieces) == 4 and all(p.grid == grid for p in pieces)


def test_apply_detailed_reports_convergence(rng):
    f = GridFunction.random(LatticeBox.centered(3, 1), rng)
    _, conv = apply_multiplier_detailed(riesz(1, 1), f, LatticeBox.centered(6, 1), 1e-9)
    assert conv.converged and conv.difference <= 1e-9
