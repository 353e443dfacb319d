"""Multiplier symbols on the torus.

A :class:`Symbol` is a 1-periodic complex function evaluated on the fundamental
domain (-1/2, 1/2]^d.  Formula symbols carry a sympy expression so that exact
partial derivatives are available; sampled tables fall back to central
differences.  Points where a formula is singular are listed in
``singular_set`` together with the value the implementation uses there.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import product as iproduct
from typing import Callable, Sequence

import numpy as np

from .fourier import TorusGrid, TorusSamples

_SAMPLE_CHUNK = 1 << 21


def reduce_to_fundamental(xi: np.ndarray) -> np.ndarray:
    """Representative of ``xi`` modulo Z^d in (-1/2, 1/2]^d."""
    return xi - np.ceil(xi - 0.5)


def smooth_step(x) -> np.ndarray:
    """C-infinity step: 0 for x <= 0, 1 for x >= 1, ``b(x)/(b(x)+b(1-x))`` with ``b = exp(-1/x)``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        bx = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        by = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
        out = bx / (bx + by)
    return np.where(x <= 0, 0.0, np.where(x >= 1, 1.0, out))


def _sin2sum(xi: np.ndarray) -> np.ndarray:
    return np.sum(np.sin(np.pi * xi) ** 2, axis=-1)


@dataclass(frozen=True, eq=False)
class Symbol:
    d: int
    func: Callable[[np.ndarray], np.ndarray]
    tag: str
    singular_set: tuple[tuple[float, ...], ...] = ()
    conventions: tuple[complex, ...] = ()
    hermitian: bool = False
    expr: Callable | None = None
    table_step: tuple[float, ...] | None = None
    _derivs: dict = field(default_factory=dict, repr=False)

    # evaluation -------------------------------------------------------------

    def _points(self, xi) -> tuple[np.ndarray, tuple[int, ...]]:
        xi = np.asarray(xi, dtype=float)
        if self.d == 1 and (xi.ndim == 0 or xi.shape[-1] != 1):
            xi = xi[..., None]
        if xi.shape[-1] != self.d:
            raise ValueError(f"expected points with trailing axis {self.d}, got shape {xi.shape}")
        return xi, xi.shape[:-1]

    def evaluate(self, xi) -> np.ndarray:
        pts, shape = self._points(xi)
        out = np.asarray(self.func(reduce_to_fundamental(pts)), dtype=np.complex128)
        return np.broadcast_to(out, shape).copy() if out.shape != shape else out

    __call__ = evaluate

    def samples(self, grid: TorusGrid) -> TorusSamples:
        """The symbol on every grid point (evaluated in slabs to bound memory)."""
        if grid.d != self.d:
            raise ValueError(f"grid dimension {grid.d} != symbol dimension {self.d}")
        axes = grid.xi_axes()
        out = np.empty(grid.sizes, dtype=np.complex128)
        slab = max(1, _SAMPLE_CHUNK // max(1, grid.count // grid.sizes[0]))
        for s in range(0, grid.sizes[0], slab):
            sub = [axes[0][s : s + slab]] + axes[1:]
            pts = np.stack(np.meshgrid(*sub, indexing="ij"), axis=-1)
            out[s : s + slab] = self.evaluate(pts)
        return TorusSamples(grid, out)

    def singular_mask(self, xi) -> np.ndarray:
        pts, shape = self._points(xi)
        red = reduce_to_fundamental(pts)
        mask = np.zeros(shape, dtype=bool)
        for p in self.singular_set:
            mask |= np.all(red == np.asarray(p), axis=-1)
        return mask

    def distance_to_singular(self, xi) -> np.ndarray:
        """Euclidean torus distance to the nearest singular point (inf if none)."""
        pts, shape = self._points(xi)
        dist = np.full(shape, np.inf)
        for p in self.singular_set:
            diff = reduce_to_fundamental(pts - np.asarray(p))
            dist = np.minimum(dist, np.linalg.norm(diff, axis=-1))
        return dist

    def conventions_report(self) -> list[dict]:
        return [
            {"point": list(p), "value": [complex(v).real, complex(v).imag]}
            for p, v in zip(self.singular_set, self.conventions)
        ]

    # derivatives ------------------------------------------------------------

    @property
    def has_analytic_derivatives(self) -> bool:
        return self.expr is not None

    @property
    def has_derivatives(self) -> bool:
        return self.expr is not None or self.table_step is not None

    def _derivative_fn(self, alpha: tuple[int, ...]):
        if alpha not in self._derivs:
            import sympy as sp

            x = sp.symbols(f"x1:{self.d + 1}")
            e = self.expr(x)
            for i, a in enumerate(alpha):
                if a:
                    e = sp.diff(e, x[i], a)
            self._derivs[alpha] = sp.lambdify(x, e, modules="numpy", cse=True)
        return self._derivs[alpha]

    def derivative(self, alpha: Sequence[int], xi) -> np.ndarray:
        """Partial derivative ``d^alpha m`` at ``xi`` (off the singular set)."""
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.d or min(alpha) < 0:
            raise ValueError(f"bad multi-index {alpha} for d={self.d}")
        pts, shape = self._points(xi)
        if self.expr is None:
            if self.table_step is None:
                raise NotImplementedError(f"symbol {self.tag} has no derivatives")
            return finite_difference(self, alpha, pts, np.asarray(self.table_step)).reshape(shape)
        red = reduce_to_fundamental(pts)
        with np.errstate(all="ignore"):
            out = self._derivative_fn(alpha)(*np.moveaxis(red, -1, 0))
        return np.broadcast_to(np.asarray(out, dtype=np.complex128), shape).copy()

    # algebra ----------------------------------------------------------------

    def _combine(self, other: "Symbol", op, name: str) -> "Symbol":
        if not isinstance(other, Symbol):
            other = constant(other, self.d)
        if other.d != self.d:
            raise ValueError("symbol dimensions differ")
        a, b = self, other
        sing = tuple(dict.fromkeys(a.singular_set + b.singular_set))
        expr = None
        if a.expr is not None and b.expr is not None:
            expr = lambda x: op(a.expr(x), b.expr(x))  # noqa: E731
        sym = Symbol(
            self.d,
            lambda xi: op(a.func(xi), b.func(xi)),
            f"{name}({a.tag},{b.tag})",
            singular_set=sing,
            hermitian=a.hermitian and b.hermitian,
            expr=expr,
        )
        conv = tuple(complex(sym.evaluate(np.asarray(p))) for p in sing)
        object.__setattr__(sym, "conventions", conv)
        return sym

    def __add__(self, other):
        return self._combine(other, lambda u, v: u + v, "sum")

    __radd__ = __add__

    def __mul__(self, other):
        return self._combine(other, lambda u, v: u * v, "product")

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other if isinstance(other, Symbol) else constant(-complex(other), self.d))

    def __repr__(self):
        return f"Symbol({self.tag!r}, d={self.d})"


# finite differences ---------------------------------------------------------


def fornberg_weights(order: int, offsets: Sequence[float]) -> np.ndarray:
    """Weights of the ``order``-th derivative at 0 on the given offsets."""
    x = np.asarray(offsets, dtype=float)
    n = len(x)
    c = np.zeros((n, order + 1))
    c1, c4 = 1.0, x[0]
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2, c5 = 1.0, c4
        c4 = x[i]
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def _stencil(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order == 0:
        return np.array([0.0]), np.array([1.0])
    m = (order + 1) // 2 + 2  # sixth-order accurate central stencil
    offs = np.arange(-m, m + 1, dtype=float)
    return offs, fornberg_weights(order, offs)


def finite_difference(m: Symbol, alpha: Sequence[int], xi, h) -> np.ndarray:
    """Tensor-product central difference approximation of ``d^alpha m``.

    ``h`` is a scalar, a per-axis vector, or a per-point array of shape
    ``(..., 1)`` / ``(..., d)``.
    """
    pts, shape = m._points(xi)
    h = np.broadcast_to(np.asarray(h, dtype=float), pts.shape)
    stencils = [_stencil(a) for a in alpha]
    out = np.zeros(shape, dtype=np.complex128)
    for combo in iproduct(*[range(len(s[0])) for s in stencils]):
        w = 1.0
        off = np.zeros(m.d)
        for ax, k in enumerate(combo):
            off[ax] = stencils[ax][0][k]
            w *= stencils[ax][1][k]
        if w == 0.0:
            continue
        out += w * m.evaluate(pts + h * off)
    scale = np.prod(h ** np.asarray(alpha, dtype=float), axis=-1)
    return out / scale


# constructors ---------------------------------------------------------------


def _sp():
    import sympy

    return sympy


def _sym_sin2sum(x):
    sp = _sp()
    return sum(sp.sin(sp.pi * v) ** 2 for v in x)


def constant(c: complex, d: int = 1) -> Symbol:
    c = complex(c)
    return Symbol(
        d,
        lambda xi: np.full(xi.shape[:-1], c, dtype=np.complex128),
        f"const:c={_fmt(c)}",
        hermitian=c.imag == 0,
        expr=lambda x: _sp().sympify(c),
    )


def exponential(k: int | Sequence[int]) -> Symbol:
    """``e^{2 pi i k.xi}``: the symbol of the kernel delta_k."""
    k = (int(k),) if np.isscalar(k) else tuple(int(v) for v in k)
    kv = np.asarray(k, dtype=float)
    return Symbol(
        len(k),
        lambda xi: np.exp(2j * np.pi * (xi @ kv)),
        f"exp:k={_fmt_vec(k)}",
        hermitian=True,
        expr=lambda x: _sp().exp(2 * _sp().pi * _sp().I * sum(ki * xv for ki, xv in zip(k, x))),
    )


def riesz(j: int, d: int) -> Symbol:
    """Riesz component ``e^{-i pi xi_j} sin(pi xi_j) / (2 sqrt(sum_k sin^2(pi xi_k)))``.

    ``j`` is 1-based.  Value 0 at xi = 0.
    """
    if not 1 <= j <= d:
        raise ValueError(f"axis j={j} out of range for d={d}")
    a = j - 1

    def func(xi):
        s = np.sqrt(_sin2sum(xi))
        num = np.exp(-1j * np.pi * xi[..., a]) * np.sin(np.pi * xi[..., a])
        return np.divide(num, 2 * s, out=np.zeros(s.shape, dtype=np.complex128), where=s > 0)

    def expr(x):
        sp = _sp()
        return sp.exp(-sp.I * sp.pi * x[a]) * sp.sin(sp.pi * x[a]) / (2 * sp.sqrt(_sym_sin2sum(x)))

    return Symbol(d, func, f"riesz:j={j}", ((0.0,) * d,), (0j,), False, expr)


def laplacian_symbol(d: int) -> Symbol:
    return Symbol(
        d,
        lambda xi: -4.0 * _sin2sum(xi) + 0j,
        "laplacian",
        hermitian=True,
        expr=lambda x: -4 * _sym_sin2sum(x),
    )


def imaginary_power(t: float, d: int) -> Symbol:
    """``(4 sum sin^2(pi xi_j))^{i t}``, value 1 at xi = 0."""
    t = float(t)

    def func(xi):
        lam = 4.0 * _sin2sum(xi)
        out = np.ones(lam.shape, dtype=np.complex128)
        pos = lam > 0
        out[pos] = np.exp(1j * t * np.log(lam[pos]))
        return out

    return Symbol(
        d, func, f"imagpow:t={_fmt(t)}", ((0.0,) * d,), (1 + 0j,), t == 0,
        lambda x: (4 * _sym_sin2sum(x)) ** (_sp().I * t),
    )


def _phi(xi):
    return 2.0 * np.sqrt(_sin2sum(xi))


def wave_cos(t: float, d: int) -> Symbol:
    """``cos(t phi)`` with ``phi = 2 sqrt(sum sin^2(pi xi_j))``."""
    t = float(t)
    return Symbol(
        d, lambda xi: np.cos(t * _phi(xi)) + 0j, f"wavecos:t={_fmt(t)}", hermitian=True,
        expr=lambda x: _sp().cos(2 * t * _sp().sqrt(_sym_sin2sum(x))),
    )


def wave_sinc(t: float, d: int) -> Symbol:
    """``sin(t phi) / phi``, value t at xi = 0 (the limit)."""
    t = float(t)

    def expr(x):
        sp = _sp()
        ph = 2 * sp.sqrt(_sym_sin2sum(x))
        return sp.sin(t * ph) / ph

    return Symbol(
        d, lambda xi: t * np.sinc(t * _phi(xi) / np.pi) + 0j, f"wavesinc:t={_fmt(t)}",
        ((0.0,) * d,), (complex(t),), True, expr,
    )


def wave_velocity(t: float, d: int) -> Symbol:
    """``-phi sin(t phi)``, the time derivative of :func:`wave_cos`."""
    t = float(t)

    def func(xi):
        ph = _phi(xi)
        return -ph * np.sin(t * ph) + 0j

    def expr(x):
        sp = _sp()
        ph = 2 * sp.sqrt(_sym_sin2sum(x))
        return -ph * sp.sin(t * ph)

    return Symbol(d, func, f"wavevel:t={_fmt(t)}", hermitian=True, expr=expr)


def negative_power(r: float, d: int) -> Symbol:
    """``|xi|^{-r}`` on the fundamental domain, value 0 at xi = 0."""
    r = float(r)

    def func(xi):
        rad = np.linalg.norm(xi, axis=-1)
        out = np.zeros(rad.shape, dtype=np.complex128)
        pos = rad > 0
        out[pos] = rad[pos] ** (-r)
        return out

    return Symbol(
        d, func, f"negpower:r={_fmt(r)}", ((0.0,) * d,), (0j,), True,
        lambda x: sum(v**2 for v in x) ** (-r / 2),
    )


def interval_indicator(a: float, b: float) -> Symbol:
    """Indicator of the arc (a, b) of T (d = 1), value 1/2 at both endpoints."""
    a, b = float(a), float(b)
    length = b - a
    if not 0 < length <= 1:
        raise ValueError(f"need a < b <= a + 1, got a={a}, b={b}")

    def func(xi):
        x = np.mod(xi[..., 0] - a, 1.0)
        out = np.where((x > 0) & (x < length), 1.0, 0.0)
        out = np.where((x == 0) | (x == length), 0.5, out)
        return out + 0j

    ends = tuple(dict.fromkeys((float(reduce_to_fundamental(np.array(a))), float(reduce_to_fundamental(np.array(b))))))
    return Symbol(1, func, f"interval:a={_fmt(a)},b={_fmt(b)}", tuple((e,) for e in ends), (0.5 + 0j,) * len(ends))


def rescaled_interval(a: float, b: float, inner: "Symbol | Callable") -> Symbol:
    """``xi -> inner(a + (b - a) xi)`` for xi in (0, 1), extended 1-periodically.

    At the seam xi = 0 the value is the mean of ``inner(a)`` and ``inner(b)``,
    so a jump there costs the rectangle rule O(N^-2) rather than O(N^-1).
    """
    a, b = float(a), float(b)
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    ev = inner.evaluate if isinstance(inner, Symbol) else inner
    name = inner.tag if isinstance(inner, Symbol) else getattr(inner, "__name__", "callable")
    ends = np.asarray(ev(np.array([a, b])), dtype=np.complex128).reshape(-1)
    seam = complex(0.5 * (ends[0] + ends[1]))

    def func(xi):
        x = np.mod(xi[..., 0], 1.0)
        out = np.asarray(ev(a + (b - a) * x), dtype=np.complex128)
        return np.where(x == 0, seam, out)

    return Symbol(1, func, f"rescaled:a={_fmt(a)},b={_fmt(b)},inner={name}", ((0.0,),), (seam,))


def sampled_table(samples: TorusSamples, tag: str = "table") -> Symbol:
    """Nearest-sample interpolation of a grid table; derivatives by central differences."""
    grid = samples.grid
    vals = samples.values
    sizes = np.asarray(grid.sizes)

    def func(xi):
        idx = np.mod(np.rint(xi * sizes).astype(np.int64), sizes)
        return vals[tuple(np.moveaxis(idx, -1, 0))]

    return Symbol(grid.d, func, tag, table_step=tuple(1.0 / sizes))


def from_callable(d: int, func: Callable[[np.ndarray], np.ndarray], tag: str, **kw) -> Symbol:
    return Symbol(d, func, tag, **kw)


def _fmt(v) -> str:
    v = complex(v)
    if v.imag == 0:
        return repr(v.real).removesuffix(".0") if float(v.real).is_integer() else repr(v.real)
    return repr(v).strip("()")


def _fmt_vec(k) -> str:
    return str(k[0]) if len(k) == 1 else "(" + ",".join(str(v) for v in k) + ")"


# mini-language --------------------------------------------------------------


class SymbolSyntaxError(ValueError):
    pass


def _num(s: str) -> float:
    s = s.strip()
    if "/" in s:
        return float(Fraction(s))
    return float(s)


def _cnum(s: str) -> complex:
    return complex(s.strip().replace("i", "j"))


def _ivec(s: str, d: int) -> tuple[int, ...]:
    s = s.strip()
    if s.startswith("("):
        parts = [p for p in s.strip("()").split(",") if p.strip()]
        vec = tuple(int(p) for p in parts)
    else:
        vec = (int(s),) + (0,) * (d - 1)
    if len(vec) != d:
        raise SymbolSyntaxError(f"vector {s!r} has wrong length for d={d}")
    return vec


_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


class _Parser:
    def __init__(self, text: str, d: int):
        self.s = text.replace(" ", "")
        self.i = 0
        self.d = d

    def peek(self, ch: str) -> bool:
        return self.s.startswith(ch, self.i)

    def expect(self, ch: str):
        if not self.peek(ch):
            raise SymbolSyntaxError(f"expected {ch!r} at position {self.i} in {self.s!r}")
        self.i += len(ch)

    def ident(self) -> str:
        mt = _IDENT.match(self.s, self.i)
        if not mt:
            raise SymbolSyntaxError(f"expected a name at position {self.i} in {self.s!r}")
        self.i = mt.end()
        return mt.group()

    def raw_value(self) -> str:
        start = self.i
        if self.peek("("):
            depth = 0
            while self.i < len(self.s):
                c = self.s[self.i]
                depth += c == "("
                depth -= c == ")"
                self.i += 1
                if depth == 0:
                    break
            return self.s[start : self.i]
        while self.i < len(self.s) and self.s[self.i] not in ",)":
            self.i += 1
        return self.s[start : self.i]

    def params(self, nested: set[str]) -> dict:
        out = {}
        while True:
            key = self.ident()
            self.expect("=")
            out[key] = self.expr() if key in nested else self.raw_value()
            if self.peek(",") and re.match(r",[A-Za-z_]\w*=", self.s[self.i :]):
                self.i += 1
                continue
            return out

    def expr(self) -> Symbol:
        name = self.ident()
        if name in ("sum", "product"):
            self.expect("(")
            args = [self.expr()]
            while self.peek(","):
                self.i += 1
                args.append(self.expr())
            self.expect(")")
            op = (lambda u, v: u + v) if name == "sum" else (lambda u, v: u * v)
            return reduce(op, args)
        params = {}
        if self.peek(":"):
            self.i += 1
            params = self.params({"inner"} if name == "rescaled" else set())
        return _build(name, params, self.d)

    def parse(self) -> Symbol:
        sym = self.expr()
        if self.i != len(self.s):
            raise SymbolSyntaxError(f"trailing input at position {self.i} in {self.s!r}")
        return sym


def _build(name: str, p: dict, d: int) -> Symbol:
    def need(*keys):
        missing = [k for k in keys if k not in p]
        extra = [k for k in p if k not in keys]
        if missing or extra:
            raise SymbolSyntaxError(f"{name}: expected parameters {keys}, got {sorted(p)}")

    try:
        if name == "const":
            need("c")
            return constant(_cnum(p["c"]), d)
        if name == "exp":
            need("k")
            return exponential(_ivec(p["k"], d))
        if name == "riesz":
            need("j")
            return riesz(int(p["j"]), d)
        if name == "laplacian":
            need()
            return laplacian_symbol(d)
        if name in ("imagpow", "wavecos", "wavesinc", "wavevel"):
            need("t")
            ctor = {"imagpow": imaginary_power, "wavecos": wave_cos, "wavesinc": wave_sinc, "wavevel": wave_velocity}[name]
            return ctor(_num(p["t"]), d)
        if name == "negpower":
            need("r")
            return negative_power(_num(p["r"]), d)
        if name in ("interval", "rescaled"):
            if d != 1:
                raise SymbolSyntaxError(f"{name} symbols are one-dimensional")
            if name == "interval":
                need("a", "b")
                return interval_indicator(_num(p["a"]), _num(p["b"]))
            need("a", "b", "inner")
            return rescaled_interval(_num(p["a"]), _num(p["b"]), p["inner"])
        if name == "table":
            need("file")
            from pathlib import Path

            text = Path(p["file"]).read_text()
            rows = [r.split(",") for r in text.strip().splitlines()[1:]]
            sizes = tuple(max(int(r[i]) for r in rows) + 1 for i in range(d))
            return sampled_table(TorusSamples.from_csv(text, TorusGrid(sizes)), tag=f"table:file={p['file']}")
    except (ValueError, TypeError) as exc:
        if isinstance(exc, SymbolSyntaxError):
            raise
        raise SymbolSyntaxError(f"{name}: {exc}") from exc
    raise SymbolSyntaxError(f"unknown symbol {name!r}")


def parse_symbol(text: str, d: int) -> Symbol:
    """Parse a spec such as ``riesz:j=1`` or ``sum(wavecos:t=2,interval:a=0.2,b=0.7)``."""
    return _Parser(text, d).parse()
