"""Finitely supported functions on Z^d.

A :class:`GridFunction` stores complex values on an axis-aligned
:class:`LatticeBox` and is implicitly zero outside of it.  Enumeration order is
row-major with axis 1 slowest, which is also numpy's C order for the value
array, so CSV output is reproducible.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

MAX_DIM = 3


def _as_vector(n, d: int | None = None) -> tuple[int, ...]:
    if np.isscalar(n):
        n = (int(n),) * (d or 1)
    vec = tuple(int(v) for v in n)
    if d is not None and len(vec) != d:
        raise ValueError(f"expected a lattice vector of length {d}, got {vec}")
    return vec


@dataclass(frozen=True)
class LatticeBox:
    """The box ``{n in Z^d : lo_i <= n_i <= hi_i}``.

    Most boxes in this package are centered (``lo = -hi``); use
    :meth:`centered` to build them.  General corners are allowed so that
    translated boxes and Minkowski sums stay exact.
    """

    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        lo, hi = _as_vector(self.lo), _as_vector(self.hi)
        if len(lo) != len(hi):
            raise ValueError("lo and hi must have the same length")
        if not 1 <= len(lo) <= MAX_DIM:
            raise ValueError(f"dimension must be between 1 and {MAX_DIM}, got {len(lo)}")
        if any(h < l for l, h in zip(lo, hi)):
            raise ValueError(f"empty box: lo={lo}, hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def centered(cls, radii: int | Sequence[int], d: int | None = None) -> "LatticeBox":
        """Box ``|n_i| <= R_i``; a scalar radius is repeated ``d`` times."""
        r = _as_vector(radii, d)
        if any(v < 0 for v in r):
            raise ValueError(f"radii must be nonnegative, got {r}")
        return cls(tuple(-v for v in r), r)

    @property
    def d(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(h - l + 1 for l, h in zip(self.lo, self.hi))

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    @property
    def is_centered(self) -> bool:
        return all(l == -h for l, h in zip(self.lo, self.hi))

    @property
    def radii(self) -> tuple[int, ...]:
        if not self.is_centered:
            raise ValueError(f"box {self} is not centered")
        return self.hi

    def axes(self) -> list[np.ndarray]:
        return [np.arange(l, h + 1) for l, h in zip(self.lo, self.hi)]

    def points(self) -> np.ndarray:
        """All points as an ``(size, d)`` integer array in enumeration order."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def contains(self, n) -> bool:
        n = _as_vector(n, self.d)
        return all(l <= v <= h for l, v, h in zip(self.lo, n, self.hi))

    def contains_box(self, other: "LatticeBox") -> bool:
        return all(l <= ol and oh <= h for l, h, ol, oh in zip(self.lo, self.hi, other.lo, other.hi))

    def index(self, n) -> int:
        """Position of ``n`` in enumeration order."""
        n = _as_vector(n, self.d)
        if not self.contains(n):
            raise KeyError(f"{n} is outside {self}")
        return int(np.ravel_multi_index(tuple(v - l for v, l in zip(n, self.lo)), self.shape))

    def shift(self, n) -> "LatticeBox":
        n = _as_vector(n, self.d)
        return LatticeBox(tuple(l + v for l, v in zip(self.lo, n)), tuple(h + v for h, v in zip(self.hi, n)))

    def expand(self, k: int | Sequence[int]) -> "LatticeBox":
        k = _as_vector(k, self.d)
        return LatticeBox(tuple(l - v for l, v in zip(self.lo, k)), tuple(h + v for h, v in zip(self.hi, k)))

    def hull(self, other: "LatticeBox") -> "LatticeBox":
        _check_dims(self.d, other.d)
        return LatticeBox(tuple(map(min, self.lo, other.lo)), tuple(map(max, self.hi, other.hi)))

    def minkowski(self, other: "LatticeBox") -> "LatticeBox":
        _check_dims(self.d, other.d)
        return LatticeBox(
            tuple(a + b for a, b in zip(self.lo, other.lo)),
            tuple(a + b for a, b in zip(self.hi, other.hi)),
        )

    def slices_in(self, outer: "LatticeBox") -> tuple[slice, ...]:
        """Index slices selecting this box inside the value array of ``outer``."""
        if not outer.contains_box(self):
            raise ValueError(f"{self} is not inside {outer}")
        return tuple(slice(l - ol, h - ol + 1) for l, h, ol in zip(self.lo, self.hi, outer.lo))

    def to_dict(self) -> dict:
        return {"d": self.d, "lo": list(self.lo), "hi": list(self.hi)}

    @classmethod
    def from_dict(cls, data: dict) -> "LatticeBox":
        return cls(tuple(data["lo"]), tuple(data["hi"]))


def _check_dims(d1: int, d2: int):
    if d1 != d2:
        raise ValueError(f"dimension mismatch: {d1} vs {d2}")


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Complex function on Z^d, zero outside ``box``.

    ``values`` has shape ``box.shape`` and is stored read-only.
    """

    box: LatticeBox
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.complex128)
        if vals.shape != self.box.shape:
            if vals.size != self.box.size:
                raise ValueError(f"{vals.size} values for a box of {self.box.size} points")
            vals = vals.reshape(self.box.shape)
        if not np.all(np.isfinite(vals)):
            raise ValueError("GridFunction values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    # construction -----------------------------------------------------------

    @classmethod
    def zeros(cls, box: LatticeBox) -> "GridFunction":
        return cls(box, np.zeros(box.shape, dtype=np.complex128))

    @classmethod
    def delta(cls, m=0, d: int | None = None, box: LatticeBox | None = None) -> "GridFunction":
        """Unit mass at ``m``; the box defaults to the single point ``{m}``."""
        m = _as_vector(m, d if box is None else box.d)
        if box is None:
            box = LatticeBox(m, m)
        vals = np.zeros(box.shape, dtype=np.complex128)
        vals[tuple(v - l for v, l in zip(m, box.lo))] = 1.0
        return cls(box, vals)

    @classmethod
    def from_callable(cls, box: LatticeBox, fn: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        """Values ``fn(points)`` where ``points`` is the ``(size, d)`` array."""
        return cls(box, np.asarray(fn(box.points()), dtype=np.complex128).reshape(box.shape))

    @classmethod
    def random(cls, box: LatticeBox, rng: np.random.Generator, kind: str = "gaussian") -> "GridFunction":
        """Random values: complex ``gaussian``, real ``sign`` (+-1) or ``phase`` (+-1, +-i)."""
        if kind == "gaussian":
            vals = rng.standard_normal(box.shape) + 1j * rng.standard_normal(box.shape)
        elif kind == "sign":
            vals = rng.choice([-1.0, 1.0], size=box.shape)
        elif kind == "phase":
            vals = rng.choice(np.array([1, 1j, -1, -1j]), size=box.shape)
        else:
            raise ValueError(f"unknown random kind {kind!r}")
        return cls(box, vals)

    # access -------------------------------------------------------------------

    @property
    def d(self) -> int:
        return self.box.d

    def __call__(self, n) -> complex:
        n = _as_vector(n, self.d)
        if not self.box.contains(n):
            return 0j
        return complex(self.values[tuple(v - l for v, l in zip(n, self.box.lo))])

    def on(self, box: LatticeBox) -> "GridFunction":
        """The same function stored on ``box`` (restricting or zero-padding)."""
        _check_dims(self.d, box.d)
        out = np.zeros(box.shape, dtype=np.complex128)
        lo = tuple(map(max, self.box.lo, box.lo))
        hi = tuple(map(min, self.box.hi, box.hi))
        if all(l <= h for l, h in zip(lo, hi)):
            common = LatticeBox(lo, hi)
            out[common.slices_in(box)] = self.values[common.slices_in(self.box)]
        return GridFunction(box, out)

    def inner(self, other: "GridFunction") -> complex:
        """``sum f(n) conj(g(n))``."""
        box = self.box.hull(other.box)
        return complex(np.vdot(other.on(box).values, self.on(box).values))

    def support_box(self) -> LatticeBox | None:
        """Smallest box containing the nonzero values, or None for zero."""
        nz = np.nonzero(self.values)
        if len(nz[0]) == 0:
            return None
        lo = tuple(int(ix.min()) + l for ix, l in zip(nz, self.box.lo))
        hi = tuple(int(ix.max()) + l for ix, l in zip(nz, self.box.lo))
        return LatticeBox(lo, hi)

    def allclose(self, other: "GridFunction", atol: float = 0.0, rtol: float = 0.0) -> bool:
        return max_abs_diff(self, other) <= atol + rtol * max(np.abs(self.values).max(initial=0), np.abs(other.values).max(initial=0))

    # arithmetic -------------------------------------------------------------

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return combine(1.0, self, 1.0, other)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return combine(1.0, self, -1.0, other)

    def __neg__(self) -> "GridFunction":
        return GridFunction(self.box, -self.values)

    def __mul__(self, c: complex) -> "GridFunction":
        return GridFunction(self.box, self.values * complex(c))

    __rmul__ = __mul__

    def __repr__(self):
        return f"GridFunction(box={self.box}, nnz={np.count_nonzero(self.values)})"

    # serialization ------------------------------------------------------------

    def to_csv(self) -> str:
        """CSV with header ``n_1,...,n_d,re,im`` in enumeration order."""
        buf = io.StringIO()
        buf.write(",".join([f"n_{i + 1}" for i in range(self.d)] + ["re", "im"]) + "\n")
        pts = self.box.points()
        for p, v in zip(pts, self.values.ravel()):
            buf.write(",".join([str(int(c)) for c in p] + [repr(float(v.real)), repr(float(v.imag))]) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "GridFunction":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        header = lines[0].split(",")
        d = len(header) - 2
        if d < 1 or header[-2:] != ["re", "im"]:
            raise ValueError(f"bad GridFunction CSV header: {lines[0]!r}")
        rows = [ln.split(",") for ln in lines[1:]]
        pts = np.array([[int(c) for c in r[:d]] for r in rows], dtype=np.int64).reshape(-1, d)
        vals = np.array([complex(float(r[d]), float(r[d + 1])) for r in rows])
        box = LatticeBox(tuple(pts.min(axis=0)), tuple(pts.max(axis=0)))
        if len(rows) != box.size or not np.array_equal(pts, box.points()):
            raise ValueError("CSV rows do not enumerate a full box in row-major order")
        return cls(box, vals)

    def to_json(self) -> str:
        flat = self.values.ravel()
        return json.dumps(
            {**self.box.to_dict(), "re": [float(v) for v in flat.real], "im": [float(v) for v in flat.imag]}
        )

    @classmethod
    def from_json(cls, text: str) -> "GridFunction":
        data = json.loads(text)
        box = LatticeBox.from_dict(data)
        return cls(box, np.array(data["re"]) + 1j * np.array(data["im"]))


def lp_norm(f: GridFunction, p: float) -> float:
    """``(sum |f(n)|^p)^(1/p)``; ``p = math.inf`` gives the sup norm."""
    p = float(p)
    if not p >= 1:
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    a = np.abs(f.values).ravel()
    top = a.max(initial=0.0)
    if top == 0.0:
        return 0.0
    if math.isinf(p):
        return float(top)
    # scaling by the max keeps large p from overflowing
    return float(top * np.sum((a / top) ** p) ** (1.0 / p))


def translate(f: GridFunction, n) -> GridFunction:
    """``tau_n f``: the function ``k -> f(n + k)``."""
    n = _as_vector(n, f.d)
    return GridFunction(f.box.shift(tuple(-v for v in n)), f.values)


def combine(a: complex, f: GridFunction, b: complex, g: GridFunction) -> GridFunction:
    """``a f + b g`` on the smallest box containing both boxes."""
    _check_dims(f.d, g.d)
    box = f.box.hull(g.box)
    out = np.zeros(box.shape, dtype=np.complex128)
    out[f.box.slices_in(box)] += complex(a) * f.values
    out[g.box.slices_in(box)] += complex(b) * g.values
    return GridFunction(box, out)


def max_abs_diff(f: GridFunction, g: GridFunction) -> float:
    """``sup_n |f(n) - g(n)|`` over the union of boxes."""
    return float(np.abs(combine(1.0, f, -1.0, g).values).max())


def linear_sum(terms: Iterable[tuple[complex, GridFunction]]) -> GridFunction:
    terms = list(terms)
    out = terms[0][1] * terms[0][0]
    for c, f in terms[1:]:
        out = combine(1.0, out, c, f)
    return out
