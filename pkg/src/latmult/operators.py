"""Difference operators, the discrete Laplacian, Riesz transforms and imaginary powers.

Stencil operators act exactly on finitely supported functions and return a
box enlarged by one cell per affected axis.  Riesz transforms and imaginary
powers have no finite stencil and go through the multiplier engine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fourier import TorusGrid
from .lattice import GridFunction, LatticeBox
from .multipliers import apply_multiplier, apply_periodic
from .symbols import imaginary_power, laplacian_symbol, riesz


@dataclass(frozen=True)
class DifferenceStencil:
    """``forward``: f(n+e_j) - f(n); ``backward``: f(n) - f(n-e_j).  ``j`` is 1-based."""

    j: int
    variant: str = "forward"

    def __post_init__(self):
        if self.variant not in ("forward", "backward"):
            raise ValueError(f"variant must be 'forward' or 'backward', got {self.variant!r}")

    def __call__(self, f: GridFunction) -> GridFunction:
        return difference(f, self.j, self.variant)


def _check_axis(j: int, d: int):
    if not 1 <= j <= d:
        raise ValueError(f"axis j={j} out of range for d={d}")


def _pad(f: GridFunction, axis: int) -> tuple[np.ndarray, LatticeBox]:
    grow = [0] * f.d
    grow[axis] = 1
    box = f.box.expand(grow)
    return f.on(box).values, box


def difference(f: GridFunction, j: int, variant: str = "forward") -> GridFunction:
    """Forward or backward difference along axis ``j`` (1-based)."""
    _check_axis(j, f.d)
    if variant not in ("forward", "backward"):
        raise ValueError(f"variant must be 'forward' or 'backward', got {variant!r}")
    a = j - 1
    v, box = _pad(f, a)
    shift = -1 if variant == "forward" else 1
    rolled = np.roll(v, shift, axis=a)  # padding makes the wrap-around zero
    out = rolled - v if variant == "forward" else v - rolled
    return GridFunction(box, out)


def laplacian(f: GridFunction) -> GridFunction:
    """``sum_j f(n+e_j) - 2 f(n) + f(n-e_j)``."""
    box = f.box.expand(1)
    v = f.on(box).values
    out = np.zeros_like(v)
    for a in range(f.d):
        out += np.roll(v, 1, axis=a) - 2.0 * v + np.roll(v, -1, axis=a)
    return GridFunction(box, out)


def laplacian_spectral(f: GridFunction, window: LatticeBox | None = None, tol: float = 1e-12) -> GridFunction:
    """The Laplacian through its symbol ``-4 sum sin^2(pi xi_j)``."""
    window = f.box.expand(1) if window is None else window
    return apply_multiplier(laplacian_symbol(f.d), f, window, tol)


def riesz_apply(j: int, f: GridFunction, window: LatticeBox, tol: float = 1e-10, **kw) -> GridFunction:
    """``R_j f`` on ``window`` via the multiplier ``riesz(j, d)``."""
    _check_axis(j, f.d)
    return apply_multiplier(riesz(j, f.d), f, window, tol, **kw)


def imaginary_power_apply(t: float, f: GridFunction, window: LatticeBox, tol: float = 1e-10, **kw) -> GridFunction:
    """``(-Delta)^{it} f`` on ``window`` via the multiplier ``imaginary_power(t, d)``."""
    return apply_multiplier(imaginary_power(t, f.d), f, window, tol, **kw)


def imaginary_power_periodic(t: float, f: GridFunction, grid: TorusGrid) -> GridFunction:
    """``(-Delta)^{it}`` on the finite group ``Z^d / N Z^d``: exactly unitary there."""
    return apply_periodic(imaginary_power(t, f.d), f, grid)
