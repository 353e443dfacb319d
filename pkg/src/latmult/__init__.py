"""Fourier multipliers on the integer lattice Z^d: kernels, regularity certificates and the lattice wave equation."""

__version__ = "0.1.0"

from .fourier import (
    GridTooSmallError,
    TorusGrid,
    TorusSamples,
    convolve,
    convolve_direct,
    forward_dft,
    inverse_dft,
    periodic_inverse_dft,
    torus_lp_norm,
    transform_at,
)
from .lattice import GridFunction, LatticeBox, combine, lp_norm, max_abs_diff, translate
from .multipliers import (
    KernelTable,
    NonConvergenceError,
    apply_kernel,
    apply_multiplier,
    apply_periodic,
    dyadic_components,
    interval_operator,
    modulate,
    multiplier_l2_norm,
    rescale_interval_symbol,
    subdivision_partition,
    synthesize_kernel,
)
from .symbols import Symbol, parse_symbol

__all__ = [
    "GridFunction",
    "GridTooSmallError",
    "KernelTable",
    "LatticeBox",
    "NonConvergenceError",
    "Symbol",
    "TorusGrid",
    "TorusSamples",
    "apply_kernel",
    "apply_multiplier",
    "apply_periodic",
    "combine",
    "convolve",
    "convolve_direct",
    "dyadic_components",
    "forward_dft",
    "interval_operator",
    "inverse_dft",
    "lp_norm",
    "max_abs_diff",
    "modulate",
    "multiplier_l2_norm",
    "parse_symbol",
    "periodic_inverse_dft",
    "rescale_interval_symbol",
    "subdivision_partition",
    "synthesize_kernel",
    "torus_lp_norm",
    "transform_at",
    "translate",
]
