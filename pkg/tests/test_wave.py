import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from latmult.lattice import GridFunction, LatticeBox, max_abs_diff
from latmult.wave import (
    energy,
    leapfrog_evolve,
    max_stable_step,
    probe_data,
    rk4_evolve,
    solve_wave,
    strichartz_ratio,
    strichartz_study,
    translated_data,
)

# J_{2n}(2): the 1D solution with f = delta, g = 0 at t = 1
BESSEL_J2N_AT_2 = [0.22389077914123562, 0.35283402861563773, 0.03399571980756843, 0.0012024289717899928]
# int_0^1 J_{2n}(2s) ds: the 1D solution with f = 0, g = delta at t = 1
BESSEL_INTEGRAL = [0.7128851465985133, 0.13616033884163992, 0.0072170893672378455, 0.00017745961136616072]


def test_delta_position_data_is_bessel():
    st_ = solve_wave(GridFunction.delta(0, 1), None, 1.0, LatticeBox.centered(3, 1), 1e-12)
    for n, v in enumerate(BESSEL_J2N_AT_2):
        assert st_.u(n) == pytest.approx(v, abs=1e-12)
        assert st_.u(-n) == pytest.approx(v, abs=1e-12)


def test_delta_velocity_data():
    st_ = solve_wave(None, GridFunction.delta(0, 1), 1.0, LatticeBox.centered(3, 1), 1e-12)
    for n, v in enumerate(BESSEL_INTEGRAL):
        assert st_.u(n) == pytest.approx(v, abs=1e-12)
    assert max_abs_diff(st_.v, solve_wave(GridFunction.delta(0, 1), None, 1.0, st_.u.box, 1e-12).u) <= 1e-12


@given(st.integers(1, 2), st.floats(0, 6), st.integers(0, 1000))
def test_energy_conserved(d, t, seed):
    rng = np.random.default_rng(seed)
    f = GridFunction.random(LatticeBox.centered(2, d), rng)
    g = GridFunction.random(LatticeBox.centered(2, d), rng)
    W = LatticeBox.centered(int(math.ceil(t)) + 20, d)
    e0 = energy(solve_wave(f, g, 0.0, W))
    assert energy(solve_wave(f, g, t, W)) == pytest.approx(e0, rel=1e-9)


def test_time_zero_identity(rng):
    f = GridFunction.random(LatticeBox.centered(3, 2), rng)
    g = GridFunction.random(LatticeBox.centered(3, 2), rng)
    s = solve_wave(f, g, 0.0, LatticeBox.centered(5, 2))
    assert max_abs_diff(s.u, f) <= 1e-12 and max_abs_diff(s.v, g) <= 1e-12


def test_steppers_agree_with_spectral(rng):
    f = GridFunction.random(LatticeBox.centered(3, 2), rng)
    g = GridFunction.random(LatticeBox.centered(3, 2), rng)
    W, B = LatticeBox.centered(8, 2), LatticeBox.centered(24, 2)
    ref = solve_wave(f, g, 1.5, W)
    rk = rk4_evolve(f, g, 1.5, 0.005, B)
    assert max_abs_diff(rk.u.on(W), ref.u) <= 2e-9
    lf = leapfrog_evolve(f, g, 1.5, 0.002, B)
    assert max_abs_diff(lf.u.on(W), ref.u) <= 1e-4


def test_leapfrog_guards():
    f = GridFunction.delta(0, 1)
    with pytest.raises(ValueError):
        leapfrog_evolve(f, None, 1.0, 1.1 * max_stable_step(1), LatticeBox.centered(40, 1))
    with pytest.raises(ValueError):
        leapfrog_evolve(f, None, 10.0, 0.1, LatticeBox.centered(12, 1))


def test_strichartz_invariances(rng):
    f = GridFunction.random(LatticeBox.centered(3, 1), rng)
    g = GridFunction.random(LatticeBox.centered(3, 1), rng)
    base = strichartz_ratio(f, g, 1.0, 1.5, 3)
    assert strichartz_ratio(f * 2.5j, g * 2.5j, 1.0, 1.5, 3) == pytest.approx(base, rel=1e-12)
    assert strichartz_ratio(*translated_data(f, g, 11), 1.0, 1.5, 3) == pytest.approx(base, abs=1e-10)
    with pytest.raises(ValueError):
        strichartz_ratio(f, g, 1.0, 3, 1.5)


def test_strichartz_study_probes():
    rep = strichartz_study(2, 2, 1.0, 1, 16, 5, seed=0)
    assert rep.labels[:3] == ["g=delta", "f=delta", "g=bump"]
    assert len(rep.ratios) == 8
    # ||sin(t phi)/phi||_inf = t bounds the (2, 2) ratio; a wide bump gets close
    assert 0.99 <= rep.max_ratio <= 1.0 + 1e-9
    assert rep.ratios_csv().startswith("index,candidate,sub_radius,ratio")
    assert len(probe_data(LatticeBox.centered(4, 2))) == 3
