"""Discrete Fourier transform on Z^d, torus quadrature and convolution.

Sign convention: the forward transform is ``F f(xi) = sum_n f(n) e^{+2 pi i n.xi}``
and the inverse is ``F^{-1} u(n) = int_T u(xi) e^{-2 pi i xi.n} dxi``.  Torus
integrals are computed with the uniform rectangle rule, which is exact for
trigonometric polynomials of per-axis degree below the grid size.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.fft

from .lattice import GridFunction, LatticeBox, _check_dims


class GridTooSmallError(ValueError):
    """A box does not fit into the requested torus grid without aliasing."""


def fast_even_size(n: int) -> int:
    """Smallest even FFT-friendly size ``>= n``."""
    n = max(int(n), 2)
    return 2 * scipy.fft.next_fast_len(-(-n // 2))


def pow2_at_least(n: int) -> int:
    return 1 << max(int(math.ceil(math.log2(max(n, 2)))), 1)


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid ``xi_k = k / N`` on T^d, reported in (-1/2, 1/2]^d."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.sizes)
        if not sizes or any(n < 2 or n % 2 for n in sizes):
            raise ValueError(f"grid sizes must be even and >= 2, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @classmethod
    def uniform(cls, n: int, d: int) -> "TorusGrid":
        return cls((int(n),) * d)

    @classmethod
    def rounded(cls, sizes: Sequence[int]) -> "TorusGrid":
        """Grid with each requested size rounded up to a fast even length."""
        return cls(tuple(fast_even_size(n) for n in sizes))

    @property
    def d(self) -> int:
        return len(self.sizes)

    @property
    def count(self) -> int:
        return math.prod(self.sizes)

    def xi_axis(self, axis: int) -> np.ndarray:
        n = self.sizes[axis]
        k = np.arange(n)
        return np.where(k > n // 2, k - n, k) / n

    def xi_axes(self) -> list[np.ndarray]:
        return [self.xi_axis(i) for i in range(self.d)]

    def points(self) -> np.ndarray:
        """Array of shape ``sizes + (d,)`` holding the sample points."""
        return np.stack(np.meshgrid(*self.xi_axes(), indexing="ij"), axis=-1)

    def period_box(self) -> LatticeBox:
        """The box ``-N/2 < n_i <= N/2``: one representative per residue class."""
        return LatticeBox(tuple(-n // 2 + 1 for n in self.sizes), tuple(n // 2 for n in self.sizes))

    def check_fits(self, box: LatticeBox, what: str = "box"):
        _check_dims(self.d, box.d)
        for i, (w, n) in enumerate(zip(box.shape, self.sizes)):
            if w > n:
                raise GridTooSmallError(
                    f"{what} of width {w} on axis {i + 1} does not fit a grid of {n} samples"
                )

    def index_arrays(self, box: LatticeBox) -> tuple[np.ndarray, ...]:
        """Open-mesh indices of the residues of ``box`` in FFT order."""
        return np.ix_(*[ax % n for ax, n in zip(box.axes(), self.sizes)])

    def to_dict(self) -> dict:
        return {"d": self.d, "sizes": list(self.sizes)}


@dataclass(frozen=True, eq=False)
class TorusSamples:
    """Values on a :class:`TorusGrid`, stored in FFT index order."""

    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != self.grid.sizes:
            raise ValueError(f"values shape {vals.shape} does not match grid {self.grid.sizes}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("TorusSamples values must be finite")
        object.__setattr__(self, "values", vals)

    def __mul__(self, other):
        if isinstance(other, TorusSamples):
            if other.grid != self.grid:
                raise ValueError("grids differ")
            return TorusSamples(self.grid, self.values * other.values)
        return TorusSamples(self.grid, self.values * other)

    __rmul__ = __mul__

    def to_csv(self) -> str:
        d = self.grid.d
        buf = io.StringIO()
        buf.write(",".join([f"k_{i + 1}" for i in range(d)] + [f"xi_{i + 1}" for i in range(d)] + ["re", "im"]) + "\n")
        ks = np.stack(np.meshgrid(*[np.arange(n) for n in self.grid.sizes], indexing="ij"), -1).reshape(-1, d)
        xs = self.grid.points().reshape(-1, d)
        for k, x, v in zip(ks, xs, self.values.ravel()):
            buf.write(",".join([str(int(c)) for c in k] + [repr(float(c)) for c in x] + [repr(float(v.real)), repr(float(v.imag))]) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, grid: TorusGrid) -> "TorusSamples":
        rows = [ln.split(",") for ln in text.strip().splitlines()[1:]]
        d = grid.d
        vals = np.array([complex(float(r[2 * d]), float(r[2 * d + 1])) for r in rows])
        return cls(grid, vals.reshape(grid.sizes))

    def sidecar_json(self) -> str:
        return json.dumps(self.grid.to_dict())


def transform_at(f: GridFunction, xi) -> np.ndarray | complex:
    """Direct sum ``sum_n f(n) e^{2 pi i n.xi}``.

    ``xi`` is a single point (a scalar when d = 1), or an array of points with
    trailing axis d (for d = 1 a flat array lists points).
    """
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 0 or (xi.ndim == 1 and f.d > 1):
        return complex(transform_at(f, xi.reshape(1, f.d))[0])
    if f.d == 1 and xi.shape[-1:] != (1,):
        xi = xi[..., None]
    out_shape = xi.shape[:-1]
    pts = xi.reshape(-1, f.d)
    pts = pts - np.round(pts)  # periodicity; keeps phases accurate
    n = f.box.points().astype(float)
    vals = f.values.ravel()
    out = np.empty(len(pts), dtype=np.complex128)
    chunk = max(1, 2_000_000 // max(len(n), 1))
    for s in range(0, len(pts), chunk):
        phase = np.exp(2j * np.pi * (pts[s : s + chunk] @ n.T))
        out[s : s + chunk] = phase @ vals
    return out.reshape(out_shape)


def forward_dft(f: GridFunction, grid: TorusGrid) -> TorusSamples:
    """Samples of ``F f`` on the grid via a zero-padded FFT."""
    grid.check_fits(f.box, "support box")
    a = np.zeros(grid.sizes, dtype=np.complex128)
    a[grid.index_arrays(f.box)] = f.values
    return TorusSamples(grid, scipy.fft.ifftn(a, norm="forward"))


def inverse_dft(u: TorusSamples, window: LatticeBox) -> GridFunction:
    """Rectangle-rule inverse transform evaluated on ``window``."""
    u.grid.check_fits(window, "window")
    full = scipy.fft.fftn(u.values, norm="forward")
    return GridFunction(window, full[u.grid.index_arrays(window)])


def periodic_inverse_dft(u: TorusSamples) -> GridFunction:
    """Inverse transform on the whole period box of the grid."""
    return inverse_dft(u, u.grid.period_box())


def convolve(f: GridFunction, g: GridFunction) -> GridFunction:
    """``(f * g)(n) = sum_k f(k) g(n - k)`` on the Minkowski-sum box (FFT path)."""
    _check_dims(f.d, g.d)
    box = f.box.minkowski(g.box)
    sizes = [scipy.fft.next_fast_len(w) for w in box.shape]
    ff = scipy.fft.fftn(f.values, s=sizes)
    gg = scipy.fft.fftn(g.values, s=sizes)
    full = scipy.fft.ifftn(ff * gg)
    return GridFunction(box, full[tuple(slice(0, w) for w in box.shape)])


def convolve_direct(f: GridFunction, g: GridFunction) -> GridFunction:
    """Direct-summation oracle for :func:`convolve`."""
    _check_dims(f.d, g.d)
    box = f.box.minkowski(g.box)
    out = np.zeros(box.shape, dtype=np.complex128)
    if np.count_nonzero(f.values) > np.count_nonzero(g.values):
        f, g = g, f
    for idx in zip(*np.nonzero(f.values)):
        start = tuple(i for i in idx)
        sl = tuple(slice(s, s + w) for s, w in zip(start, g.box.shape))
        out[sl] += f.values[idx] * g.values
    return GridFunction(box, out)


def torus_lp_norm(u: TorusSamples, p: float) -> float:
    """Rectangle-rule ``L^p(T^d)`` norm; ``p = inf`` gives the max."""
    p = float(p)
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    a = np.abs(u.values)
    if math.isinf(p):
        return float(a.max())
    top = a.max()
    if top == 0:
        return 0.0
    return float(top * np.mean((a / top) ** p) ** (1.0 / p))


def grid_for(*boxes: LatticeBox, factor: int = 1, minimum: int = 16) -> TorusGrid:
    """Power-of-two grid holding every box ``factor`` times over."""
    d = boxes[0].d
    sizes = []
    for i in range(d):
        w = max(b.shape[i] for b in boxes)
        sizes.append(max(pow2_at_least(factor * w), minimum))
    return TorusGrid(tuple(sizes))
