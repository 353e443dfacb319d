"""The lattice wave equation ``d_t^2 u = Delta u``, ``u(0) = f``, ``d_t u(0) = g``.

The spectral solver applies ``cos(t phi)`` to f and ``sin(t phi)/phi`` to g,
with ``phi(xi) = 2 sqrt(sum sin^2(pi xi_j))``.  Two time steppers on a finite
buffer box serve as independent oracles: the second-order leapfrog scheme and
classical RK4.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .fourier import TorusGrid, forward_dft, inverse_dft
from .lattice import GridFunction, LatticeBox, lp_norm, translate
from .multipliers import GRID_CAPS, _start_size, refine
from .operators import difference
from .symbols import wave_cos, wave_sinc, wave_velocity

STEP_SAFETY = 0.9
BUFFER_MARGIN = 16


@dataclass(frozen=True, eq=False)
class WaveState:
    t: float
    u: GridFunction
    v: GridFunction

    def __post_init__(self):
        if self.u.d != self.v.d:
            raise ValueError("u and v must share a dimension")

    @property
    def d(self) -> int:
        return self.u.d

    def on(self, box: LatticeBox) -> "WaveState":
        return WaveState(self.t, self.u.on(box), self.v.on(box))

    def to_csv(self) -> str:
        box = self.u.box.hull(self.v.box)
        u, v = self.u.on(box).values.ravel(), self.v.on(box).values.ravel()
        buf = io.StringIO()
        buf.write(",".join([f"n_{i + 1}" for i in range(box.d)] + ["u_re", "u_im", "v_re", "v_im"]) + "\n")
        for p, a, b in zip(box.points(), u, v):
            buf.write(",".join([str(int(c)) for c in p] + [repr(float(x)) for x in (a.real, a.imag, b.real, b.imag)]) + "\n")
        return buf.getvalue()


def _zero_like(f: GridFunction | None, g: GridFunction | None) -> tuple[GridFunction, GridFunction]:
    if f is None and g is None:
        raise ValueError("need at least one of f, g")
    if f is None:
        f = GridFunction.zeros(g.box)
    if g is None:
        g = GridFunction.zeros(f.box)
    if f.d != g.d:
        raise ValueError("f and g must share a dimension")
    return f, g


def solve_wave(
    f: GridFunction | None,
    g: GridFunction | None,
    t: float,
    window: LatticeBox,
    tol: float = 1e-10,
    *,
    accept_nonconverged: bool = False,
) -> WaveState:
    """Spectral solution ``(u, d_t u)`` at time ``t`` on ``window``."""
    f, g = _zero_like(f, g)
    t = float(t)
    if not math.isfinite(t):
        raise ValueError("t must be finite")
    d = f.d
    c, s, w = wave_cos(t, d), wave_sinc(t, d), wave_velocity(t, d)
    data = f.box.hull(g.box)
    width = max(max(a, b) for a, b in zip(data.hull(window).shape, window.minkowski(data).shape))

    def compute(n):
        grid = TorusGrid.uniform(n, d)
        ff, gg = forward_dft(f, grid).values, forward_dft(g, grid).values
        cs = c.samples(grid).values
        from .fourier import TorusSamples

        u = inverse_dft(TorusSamples(grid, cs * ff + s.samples(grid).values * gg), window).values
        v = inverse_dft(TorusSamples(grid, w.samples(grid).values * ff + cs * gg), window).values
        return np.stack([u, v])

    uv, _ = refine(compute, _start_size(width), GRID_CAPS[d], tol, accept_nonconverged=accept_nonconverged)
    return WaveState(t, GridFunction(window, uv[0]), GridFunction(window, uv[1]))


def energy(state: WaveState) -> float:
    """``||v||_2^2 + sum_j ||d_j u||_2^2`` with forward differences."""
    e = lp_norm(state.v, 2) ** 2
    for j in range(1, state.d + 1):
        e += lp_norm(difference(state.u, j), 2) ** 2
    return float(e)


# time stepping --------------------------------------------------------------------


def max_stable_step(d: int) -> float:
    """``0.9 * 2 / sqrt(4 d)``: the leapfrog CFL limit with a safety factor."""
    return STEP_SAFETY * 2.0 / math.sqrt(4.0 * d)


def _lap(v: np.ndarray) -> np.ndarray:
    """Stencil Laplacian on an array, zero outside."""
    out = -2.0 * v.ndim * v
    for a in range(v.ndim):
        lo = [slice(None)] * v.ndim
        hi = [slice(None)] * v.ndim
        lo[a], hi[a] = slice(0, -1), slice(1, None)
        out[tuple(lo)] += v[tuple(hi)]
        out[tuple(hi)] += v[tuple(lo)]
    return out


def check_buffer(f: GridFunction, g: GridFunction, t: float, buffer: LatticeBox, margin: int = BUFFER_MARGIN):
    need = f.box.hull(g.box).expand(int(math.ceil(abs(t))) + margin)
    if not buffer.contains_box(need):
        raise ValueError(f"buffer {buffer} must contain the data box grown by ceil(t) + {margin}: {need}")


def _buffer_data(f, g, t, buffer):
    f, g = _zero_like(f, g)
    check_buffer(f, g, t, buffer)
    return f.on(buffer).values.copy(), g.on(buffer).values.copy()


def leapfrog_evolve(
    f: GridFunction | None, g: GridFunction | None, t: float, dt: float, buffer: LatticeBox
) -> WaveState:
    """Central-difference two-step scheme up to time ``t`` (dt adjusted to land on t)."""
    d = (f or g).d
    if not 0 < dt <= max_stable_step(d):
        raise ValueError(f"dt={dt} outside (0, {max_stable_step(d):.6g}]")
    u0, v0 = _buffer_data(f, g, t, buffer)
    if t == 0:
        return WaveState(0.0, GridFunction(buffer, u0), GridFunction(buffer, v0))
    steps = int(math.ceil(abs(t) / dt - 1e-12))
    h = t / steps
    prev = u0
    cur = u0 + h * v0 + 0.5 * h * h * _lap(u0)
    for _ in range(steps - 1):
        prev, cur = cur, 2.0 * cur - prev + h * h * _lap(cur)
    nxt = 2.0 * cur - prev + h * h * _lap(cur)
    vel = (nxt - prev) / (2.0 * h)
    return WaveState(float(t), GridFunction(buffer, cur), GridFunction(buffer, vel))


def rk4_evolve(
    f: GridFunction | None, g: GridFunction | None, t: float, dt: float, buffer: LatticeBox
) -> WaveState:
    """Classical RK4 on the first-order system ``u' = v``, ``v' = Delta u``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    u, v = _buffer_data(f, g, t, buffer)
    if t == 0:
        return WaveState(0.0, GridFunction(buffer, u), GridFunction(buffer, v))
    steps = int(math.ceil(abs(t) / dt - 1e-12))
    h = t / steps
    for _ in range(steps):
        k1u, k1v = v, _lap(u)
        k2u, k2v = v + 0.5 * h * k1v, _lap(u + 0.5 * h * k1u)
        k3u, k3v = v + 0.5 * h * k2v, _lap(u + 0.5 * h * k2u)
        k4u, k4v = v + h * k3v, _lap(u + h * k3u)
        u = u + h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
        v = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return WaveState(float(t), GridFunction(buffer, u), GridFunction(buffer, v))


# Strichartz ratios -------------------------------------------------------------------


def strichartz_denominator(f: GridFunction, g: GridFunction, p: float) -> float:
    """``||g||_p + sum_j ||d_j f||_p``."""
    return lp_norm(g, p) + sum(lp_norm(difference(f, j), p) for j in range(1, f.d + 1))


def strichartz_boxes(f: GridFunction, g: GridFunction, t: float) -> tuple[LatticeBox, LatticeBox]:
    """(window, measured box): the data hull grown by 2 * reach and by reach, reach = ceil(t) + 8."""
    reach = int(math.ceil(abs(t))) + 8
    hull = f.box.hull(g.box)
    return hull.expand(2 * reach), hull.expand(reach)


def _check_pq(p: float, q: float):
    if not (1 < p <= 2 <= q < math.inf):
        raise ValueError(f"need 1 < p <= 2 <= q < inf, got p={p}, q={q}")


def strichartz_ratio(
    f: GridFunction | None,
    g: GridFunction | None,
    t: float,
    p: float,
    q: float,
    window: LatticeBox | None = None,
    tol: float = 1e-10,
    measure: LatticeBox | None = None,
) -> float:
    """``||u(., t)||_q / (||g||_p + sum_j ||d_j f||_p)``.

    The data are scaled to unit denominator before solving, so the ratio is
    homogeneous of degree 0 up to rounding.  By default the solution is
    computed on the data hull grown by ``2 * reach`` and measured on the hull
    grown by ``reach``.
    """
    _check_pq(p, q)
    f, g = _zero_like(f, g)
    den = strichartz_denominator(f, g, p)
    if den == 0:
        raise ValueError("initial data have zero Strichartz denominator")
    dw, dm = strichartz_boxes(f, g, t)
    window = dw if window is None else window
    measure = (dm if measure is None else measure)
    if not window.contains_box(measure):
        measure = window
    st = solve_wave(f * (1.0 / den), g * (1.0 / den), t, window, tol, accept_nonconverged=True)
    return lp_norm(st.u.on(measure), q)


@dataclass
class StrichartzReport:
    p: float
    q: float
    t: float
    d: int
    R: int
    trials: int
    seed: int
    ratios: list[float]
    max_ratio: float
    argmax: int
    reach: int
    window_rule: str = "data hull + 2*reach"
    measure_rule: str = "data hull + reach"
    sub_radii: list[int] = field(default_factory=list)
    labels: list[str] = field(default_factory=list)

    @property
    def argmax_label(self) -> str:
        return self.labels[self.argmax] if self.labels else str(self.argmax)

    def to_dict(self) -> dict:
        from dataclasses import asdict

        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def ratios_csv(self) -> str:
        labels = self.labels or [f"trial-{i}" for i in range(len(self.ratios))]
        lines = ["index,candidate,sub_radius,ratio"]
        lines += [f"{i},{c},{r},{v!r}" for i, (c, r, v) in enumerate(zip(labels, self.sub_radii, self.ratios))]
        return "\n".join(lines) + "\n"


def random_data(box: LatticeBox, rng: np.random.Generator, multiscale: bool = True) -> tuple[GridFunction, GridFunction, int]:
    """Complex Gaussian (f, g) on ``box``, or on a random sub-box of log-uniform radius."""
    R = max(box.radii) if box.is_centered else max(box.shape) // 2
    rho = R
    sub = box
    if multiscale:
        rho = max(int(math.floor(math.exp(rng.uniform(0.0, math.log(R + 1.0))))) - 1, 0)
        center = [int(rng.integers(lo + rho, hi - rho + 1)) for lo, hi in zip(box.lo, box.hi)]
        sub = LatticeBox.centered(rho, box.d).shift(center)
    f = GridFunction.random(sub, rng, "gaussian")
    g = GridFunction.random(sub, rng, "gaussian")
    return f, g, rho


def probe_data(box: LatticeBox) -> list[tuple[str, GridFunction | None, GridFunction | None, int]]:
    """Deterministic candidates: point data in f or g, and a wide smooth bump in g.

    Point data concentrate the transform at high frequencies; the bump
    concentrates it at low frequencies, where ``sin(t phi)/phi`` approaches t.
    """
    d = box.d
    R = max(box.radii)
    delta = GridFunction.delta(0, d)
    bump = GridFunction.from_callable(
        box, lambda n: np.prod(np.cos(np.pi * n / (2 * (R + 1))) ** 2, axis=-1)
    )
    return [("g=delta", None, delta, 0), ("f=delta", delta, None, 0), ("g=bump", None, bump, R)]


def strichartz_study(
    p: float, q: float, t: float, d: int, R: int, trials: int, seed: int = 0, *, tol: float = 1e-10,
    multiscale: bool = True, probes: bool = True,
) -> StrichartzReport:
    """Ratios over the probe data and seeded random data supported in the box of radius ``R``."""
    _check_pq(p, q)
    box = LatticeBox.centered(R, d)
    ratios, radii, labels = [], [], []
    for name, f, g, rho in (probe_data(box) if probes else []):
        ratios.append(strichartz_ratio(f, g, t, p, q, tol=tol))
        radii.append(rho)
        labels.append(name)
    for i, ss in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        f, g, rho = random_data(box, np.random.default_rng(ss), multiscale)
        ratios.append(strichartz_ratio(f, g, t, p, q, tol=tol))
        radii.append(rho)
        labels.append(f"trial-{i}")
    i = int(np.argmax(ratios))
    return StrichartzReport(float(p), float(q), float(t), d, R, trials, seed, ratios, ratios[i], i,
                            int(math.ceil(abs(t))) + 8, sub_radii=radii, labels=labels)


def translated_data(f: GridFunction, g: GridFunction, n) -> tuple[GridFunction, GridFunction]:
    """``(f(. - n), g(. - n))``: the data moved by ``+n``."""
    neg = tuple(-int(v) for v in np.atleast_1d(n))
    return translate(f, neg), translate(g, neg)
