"""Kernel synthesis and application of Fourier multipliers.

Every torus integral is a rectangle rule on a power-of-two grid.  Grids are
doubled until the quantity of interest stops changing; when the successive
differences shrink geometrically the sequence is additionally accelerated by
Richardson extrapolation with the observed ratio.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.fft
import scipy.special

from .fourier import TorusGrid, TorusSamples, forward_dft, inverse_dft, pow2_at_least, convolve
from .lattice import GridFunction, LatticeBox, _check_dims
from .symbols import Symbol, reduce_to_fundamental, rescaled_interval, smooth_step

GRID_CAPS = {1: 1 << 16, 2: 1 << 12, 3: 1 << 8}


class NonConvergenceError(RuntimeError):
    """Grid doubling reached its cap before meeting the tolerance."""

    def __init__(self, message: str, last, previous, convergence: "Convergence"):
        super().__init__(message)
        self.last = last
        self.previous = previous
        self.convergence = convergence


@dataclass
class Convergence:
    N: int
    difference: float
    converged: bool
    extrapolated: bool
    tol: float
    history: list[tuple[int, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "difference": self.difference,
            "converged": self.converged,
            "extrapolated": self.extrapolated,
            "tol": self.tol,
            "history": [list(h) for h in self.history],
        }


def _sup(a) -> float:
    return float(np.max(np.abs(a), initial=0.0))


def refine(
    compute: Callable[[int], np.ndarray],
    n0: int,
    cap: int,
    tol: float,
    *,
    extrapolate: bool = True,
    accept_nonconverged: bool = False,
) -> tuple[np.ndarray, Convergence]:
    """Double ``N`` from ``n0`` until consecutive estimates differ by < ``tol``.

    Raw iterates ``K_N`` are accelerated by ``K + (K - K_prev) / (r - 1)``
    when the last two difference ratios ``r`` agree to 15% and exceed 1.5,
    which is the regime of algebraic convergence ``C N^{-k}``.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if n0 > cap:
        raise NonConvergenceError(f"initial grid {n0} exceeds cap {cap}", None, None,
                                  Convergence(n0, math.inf, False, False, tol))
    raws, diffs, ests = [], [], []
    history = []
    n = n0
    extrap_used = False
    while True:
        raw = np.asarray(compute(n))
        est = raw
        used = False
        if raws:
            diffs.append(_sup(raw - raws[-1]))
            if extrapolate and len(diffs) >= 3 and diffs[-1] > 0 and diffs[-2] > 0:
                r, r_prev = diffs[-2] / diffs[-1], diffs[-3] / diffs[-2]
                if r > 1.5 and r_prev > 1.5 and abs(r / r_prev - 1) < 0.15:
                    est = raw + (raw - raws[-1]) / (r - 1)
                    used = True
        raws.append(raw)
        if ests:
            delta = _sup(est - ests[-1])
            history.append((n, delta))
            if delta < tol or (diffs and diffs[-1] == 0.0):
                conv = Convergence(n, delta, True, used, tol, history)
                return est, conv
        ests.append(est)
        extrap_used = used
        if 2 * n > cap:
            delta = history[-1][1] if history else math.inf
            conv = Convergence(n, delta, False, extrap_used, tol, history)
            if accept_nonconverged:
                return est, conv
            prev = ests[-2] if len(ests) > 1 else None
            raise NonConvergenceError(
                f"no convergence to tol={tol:g} by N={n} (last difference {delta:.3g})", est, prev, conv
            )
        n *= 2


def _start_size(width: int, minimum: int = 16) -> int:
    return max(pow2_at_least(2 * width), minimum)


def _cap(d: int, cap: int | None) -> int:
    return GRID_CAPS[d] if cap is None else int(cap)


# kernels ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KernelTable:
    """Kernel values ``K(n) = int m(xi) e^{-2 pi i xi.n} dxi`` on a box."""

    tag: str
    kernel: GridFunction
    N: int
    aliasing_estimate: float
    tol: float
    converged: bool = True
    hermitian: bool = False

    @property
    def box(self) -> LatticeBox:
        return self.kernel.box

    @property
    def values(self) -> np.ndarray:
        return self.kernel.values

    @property
    def d(self) -> int:
        return self.kernel.d

    def __call__(self, n) -> complex:
        return self.kernel(n)

    def metadata(self) -> dict:
        return {
            "symbol": self.tag,
            "N": self.N,
            "aliasing_estimate": self.aliasing_estimate,
            "tol": self.tol,
            "converged": self.converged,
            "box": self.box.to_dict(),
        }

    def to_csv(self) -> str:
        return self.kernel.to_csv()

    def metadata_json(self) -> str:
        return json.dumps(self.metadata(), indent=2)

    @classmethod
    def from_csv(cls, text: str, meta: dict) -> "KernelTable":
        return cls(meta["symbol"], GridFunction.from_csv(text), int(meta["N"]),
                   float(meta["aliasing_estimate"]), float(meta["tol"]), bool(meta.get("converged", True)))

    @classmethod
    def from_values(cls, kernel: GridFunction, tag: str = "table") -> "KernelTable":
        return cls(tag, kernel, 0, 0.0, 0.0)


def synthesize_kernel(
    m: Symbol,
    box: LatticeBox,
    tol: float = 1e-8,
    *,
    cap: int | None = None,
    extrapolate: bool = True,
    accept_nonconverged: bool = False,
) -> KernelTable:
    """Kernel of ``T_m`` on ``box`` by rectangle-rule quadrature with grid doubling."""
    _check_dims(m.d, box.d)
    cap = _cap(m.d, cap)

    def compute(n):
        grid = TorusGrid.uniform(n, m.d)
        full = scipy.fft.fftn(m.samples(grid).values, norm="forward")
        return full[grid.index_arrays(box)]

    vals, conv = refine(compute, _start_size(max(box.shape)), cap, tol,
                        extrapolate=extrapolate, accept_nonconverged=accept_nonconverged)
    return KernelTable(m.tag, GridFunction(box, vals), conv.N, conv.difference, tol, conv.converged, m.hermitian)


def apply_kernel(K: KernelTable | GridFunction, f: GridFunction) -> GridFunction:
    """Exact convolution of the (truncated) kernel with ``f``."""
    kern = K.kernel if isinstance(K, KernelTable) else K
    _check_dims(kern.d, f.d)
    return convolve(kern, f)


# application -------------------------------------------------------------------


def apply_multiplier_detailed(
    m: Symbol,
    f: GridFunction,
    window: LatticeBox,
    tol: float = 1e-10,
    *,
    cap: int | None = None,
    extrapolate: bool = True,
    accept_nonconverged: bool = False,
) -> tuple[GridFunction, Convergence]:
    _check_dims(m.d, f.d)
    _check_dims(m.d, window.d)
    cap = _cap(m.d, cap)
    width = max(max(a, b) for a, b in zip(f.box.hull(window).shape, window.minkowski(f.box).shape))

    def compute(n):
        grid = TorusGrid.uniform(n, m.d)
        u = forward_dft(f, grid) * m.samples(grid)
        return inverse_dft(u, window).values

    vals, conv = refine(compute, _start_size(width), cap, tol,
                        extrapolate=extrapolate, accept_nonconverged=accept_nonconverged)
    return GridFunction(window, vals), conv


def apply_multiplier(m: Symbol, f: GridFunction, window: LatticeBox, tol: float = 1e-10, **kw) -> GridFunction:
    """``T_m f`` on ``window``: ``F^{-1}(m F f)`` with grid doubling to ``tol``."""
    return apply_multiplier_detailed(m, f, window, tol, **kw)[0]


def apply_periodic(m: Symbol, f: GridFunction, grid: TorusGrid) -> GridFunction:
    """The multiplier on the finite group ``Z^d / N Z^d`` (no refinement).

    The result lives on the period box of ``grid``; it is the exact discrete
    analogue of ``T_m``, for which composition and unitarity hold exactly.
    """
    return inverse_dft(forward_dft(f, grid) * m.samples(grid), grid.period_box())


def multiplier_energy(
    m: Symbol, f: GridFunction, tol: float = 1e-12, *, cap: int | None = None, accept_nonconverged: bool = False
) -> tuple[float, Convergence]:
    """``||T_m f||_2^2`` over all of Z^d, via Plancherel on refined grids."""
    _check_dims(m.d, f.d)
    scale = float(np.sum(np.abs(f.values) ** 2)) or 1.0

    def compute(n):
        grid = TorusGrid.uniform(n, m.d)
        u = forward_dft(f, grid).values * m.samples(grid).values
        return np.array(np.mean(np.abs(u) ** 2) / scale)

    val, conv = refine(compute, _start_size(max(f.box.shape)), _cap(m.d, cap), tol,
                       accept_nonconverged=accept_nonconverged)
    return float(val) * scale, conv


def multiplier_l2_norm(m: Symbol, f: GridFunction, tol: float = 1e-12, **kw) -> float:
    return math.sqrt(max(multiplier_energy(m, f, tol, **kw)[0], 0.0))


# one-dimensional machinery -----------------------------------------------------------


def rescale_interval_symbol(m: Symbol | Callable, a: float, b: float) -> Symbol:
    """Symbol ``xi -> m(a + (b - a) xi)`` on [0, 1), extended periodically."""
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    return rescaled_interval(a, b, m)


def modulate(f: GridFunction, a) -> GridFunction:
    """``n -> e^{2 pi i a.n} f(n)``."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    phase = np.exp(2j * np.pi * (f.box.points() @ a)).reshape(f.box.shape)
    return GridFunction(f.box, f.values * phase)


def interval_operator(
    m: Symbol | Callable, a: float, b: float, f: GridFunction, window: LatticeBox, nodes: int = 4096
) -> GridFunction:
    """Direct evaluation of the interval operator ``T^{a,b}_m`` (d = 1).

    ``(1/(b-a)) int_a^b m(xi) Ff((xi-a)/(b-a)) e^{-2 pi i n (xi-a)/(b-a)} dxi``
    by Gauss-Legendre quadrature, with ``Ff`` summed directly.
    """
    from .fourier import transform_at

    if f.d != 1:
        raise ValueError("interval operators are one-dimensional")
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    y, w = _gauss_legendre01(int(nodes))
    ev = m.evaluate if isinstance(m, Symbol) else m
    mv = np.asarray(ev(a + (b - a) * y), dtype=np.complex128)
    fv = transform_at(f, y)
    n = window.axes()[0].astype(float)
    phase = np.exp(-2j * np.pi * np.outer(n, y))
    return GridFunction(window, phase @ (w * mv * fv))


@functools.lru_cache(maxsize=8)
def _gauss_legendre01(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on (0, 1)."""
    x, w = scipy.special.roots_legendre(nodes)
    return 0.5 * (x + 1.0), 0.5 * w


def subdivision_partition(points: Sequence[float], eps: float) -> list[Symbol]:
    """Smooth partition of unity adapted to ``0 = a_0 < a_1 < ... < a_s = 1``.

    ``phi_j`` vanishes on ``|xi - a_j| <= eps`` and equals 1 for
    ``|xi - a_j| >= 2 eps``.  Returns ``[phi, (1 - phi_1)/(s-1), ...]`` with
    ``phi`` the mean of the ``phi_j``; the pieces sum to 1.
    """
    pts = [float(p) for p in points]
    s = len(pts) - 1
    if s < 2 or pts[0] != 0.0 or pts[-1] != 1.0:
        raise ValueError("need points 0 = a_0 < a_1 < ... < a_s = 1 with s >= 2")
    if any(b <= a for a, b in zip(pts, pts[1:])):
        raise ValueError("points must be strictly increasing")
    if not eps > 0:
        raise ValueError("eps must be positive")
    inner = pts[1:-1]
    if inner[0] - 2 * eps <= 0 or inner[-1] + 2 * eps >= 1:
        raise ValueError(f"eps={eps} pushes a cutoff outside (0, 1)")
    if any(b - a <= 4 * eps for a, b in zip(inner, inner[1:])):
        raise ValueError(f"eps={eps} makes neighbouring cutoffs overlap")

    def cutoff(aj):
        def func(xi):
            x = np.mod(xi[..., 0], 1.0)
            return smooth_step((np.abs(x - aj) - eps) / eps) + 0j

        return func

    cuts = [cutoff(aj) for aj in inner]
    k = len(cuts)
    phi = Symbol(1, lambda xi: sum(c(xi) for c in cuts) / k, f"partition:phi,eps={eps!r}", hermitian=False)
    pieces = [phi]
    for j, c in enumerate(cuts, start=1):
        pieces.append(Symbol(1, (lambda c: lambda xi: (1.0 - c(xi)) / k)(c), f"partition:piece={j},eps={eps!r}"))
    return pieces


def partition_cutoff(aj: float, eps: float) -> Symbol:
    """The single cutoff ``phi_j`` around ``aj``."""
    return Symbol(
        1,
        lambda xi: smooth_step((np.abs(np.mod(xi[..., 0], 1.0) - aj) - eps) / eps) + 0j,
        f"cutoff:a={aj!r},eps={eps!r}",
    )


# Littlewood-Paley pieces -------------------------------------------------------


def lp_chi(t) -> np.ndarray:
    """1 on |t| <= 1, 0 on |t| >= 2, smooth in between."""
    return 1.0 - smooth_step(np.abs(t) - 1.0)


def lp_bump(t) -> np.ndarray:
    """``chi(t) - chi(2t)``: supported in 1/2 <= |t| <= 2, dyadic translates sum to 1."""
    return lp_chi(t) - lp_chi(2 * np.asarray(t))


def lp_cutoff(radius) -> np.ndarray:
    """``sum_{j>=3} lp_bump(2^j r)`` in closed form: ``chi(8 r)`` for r > 0."""
    return lp_chi(8 * np.asarray(radius, dtype=float))


def dyadic_components(m: Symbol, j_max: int, grid: TorusGrid) -> list[TorusSamples]:
    """Pieces ``m_j = m * lp_bump(2^j |xi|)`` for ``j = 3, ..., j_max``.

    Piece ``j`` lives on the shell ``2^{-j-1} <= |xi| <= 2^{-j+1}``; their sum
    equals ``m * lp_cutoff`` wherever ``|xi| >= 2^{-j_max}``.
    """
    if j_max < 3:
        raise ValueError("j_max must be >= 3")
    base = m.samples(grid).values
    r = np.linalg.norm(reduce_to_fundamental(grid.points()), axis=-1)
    return [TorusSamples(grid, base * lp_bump(2.0**j * r)) for j in range(3, j_max + 1)]
