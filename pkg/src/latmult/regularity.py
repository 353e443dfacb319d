"""Numerical certificates for multiplier and kernel regularity.

Measured quantities: distribution functions and weak-Lorentz constants of a
symbol, Mikhlin derivative constants, the integral Hormander sum of a kernel,
kernel decay constants, and lower bounds for l^p -> l^q operator norms.
These are measurements on finite grids and boxes, not proofs; every study
reports the value at two resolutions so growth is visible.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .fourier import TorusGrid, forward_dft, inverse_dft
from .lattice import GridFunction, LatticeBox, lp_norm
from .multipliers import KernelTable, apply_multiplier_detailed, synthesize_kernel
from .symbols import Symbol, finite_difference, reduce_to_fundamental


def _rel(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def _delta_entry(name: str, v1: float, v2: float, n1, n2) -> dict:
    return {"quantity": name, "coarse": v1, "fine": v2, "coarse_param": n1, "fine_param": n2, "relative_change": _rel(v1, v2)}


# distribution function and weak-Lorentz ------------------------------------------


def _abs_samples(m: Symbol, N: int) -> np.ndarray:
    return np.abs(m.samples(TorusGrid.uniform(N, m.d)).values).ravel()


def distribution_function(m: Symbol, s: float, N: int) -> float:
    """Rectangle-rule measure of ``{xi : |m(xi)| >= s}``."""
    if not s > 0:
        raise ValueError(f"s must be positive, got {s}")
    a = _abs_samples(m, N)
    return float(np.count_nonzero(a >= s)) / a.size


def distribution_curve(m: Symbol, s_values: Sequence[float], N: int) -> np.ndarray:
    """Distribution function at many levels from one set of samples."""
    a = np.sort(_abs_samples(m, N))
    s = np.asarray(s_values, dtype=float)
    return (a.size - np.searchsorted(a, s, side="left")) / a.size


@dataclass
class WeakLorentzResult:
    alpha: float
    N: int
    constant: float
    argmax_s: float
    ladder: list[float]
    values: list[float]
    excluded_levels: int
    min_cells: int


def weak_lorentz_detail(
    m: Symbol, alpha: float, N: int, *, ladder: int = 64, min_cells: int | None = None
) -> WeakLorentzResult:
    """``sup_s s^alpha |{|m| >= s}|`` over a log-spaced ladder in [1, N].

    Levels whose superlevel set holds fewer than ``min_cells`` grid points
    (default ``32^d``) are skipped: below that the lattice-point count of a
    small set is dominated by discretisation error, not by the symbol.
    """
    if not alpha > 1:
        raise ValueError(f"alpha must be > 1, got {alpha}")
    min_cells = 32**m.d if min_cells is None else int(min_cells)
    a = np.sort(_abs_samples(m, N))
    s = np.geomspace(1.0, float(N), ladder)
    counts = a.size - np.searchsorted(a, s, side="left")
    keep = counts >= min_cells
    keep[0] = True  # s = 1 is always measured
    vals = s**alpha * counts / a.size
    kept = np.where(keep, vals, 0.0)
    i = int(np.argmax(kept))
    return WeakLorentzResult(
        float(alpha), int(N), float(kept[i]), float(s[i]),
        [float(v) for v in s[keep]], [float(v) for v in vals[keep]], int(np.count_nonzero(~keep)), min_cells,
    )


def weak_lorentz_constant(m: Symbol, alpha: float, N: int, **kw) -> float:
    return weak_lorentz_detail(m, alpha, N, **kw).constant


# Mikhlin constants -------------------------------------------------------------------


def multi_indices(d: int, k: int) -> list[tuple[int, ...]]:
    """All multi-indices of total order ``k`` in ``d`` variables."""
    return [a for a in itertools.product(range(k + 1), repeat=d) if sum(a) == k]


@dataclass
class MikhlinResult:
    N: int
    method: str
    constants: list[float]
    points_used: int
    excluded_singular: int
    excluded_rim: int
    excluded_underflow: int
    weight: str


def _mikhlin_points(m: Symbol, N: int, rim: int) -> tuple[np.ndarray, int, int]:
    pts = TorusGrid.uniform(N, m.d).points().reshape(-1, m.d)
    edge = np.any(np.abs(pts) > 0.5 - rim / N, axis=-1) if rim > 0 else np.zeros(len(pts), dtype=bool)
    sing = m.singular_mask(pts) & ~edge
    keep = ~(edge | sing)
    return pts[keep], int(np.count_nonzero(sing)), int(np.count_nonzero(edge))


# relative step per derivative order: balances O(h^6) truncation against
# O(eps / h^k) cancellation
FD_ETA = {0: 0.01, 1: 0.01, 2: 0.01, 3: 0.02, 4: 0.03}
FD_REACH = 0.2


def fd_step(m: Symbol, pts: np.ndarray, order: int = 1) -> np.ndarray:
    """Scale-aware step ``eta_k * min(distance to singular set, 0.2)``."""
    return FD_ETA.get(order, 0.03) * np.minimum(m.distance_to_singular(pts), FD_REACH)


def weighted_derivatives(
    m: Symbol, k: int, pts: np.ndarray, method: str = "analytic", weight: np.ndarray | None = None, h=None
) -> np.ndarray:
    """``weight * max_{|alpha| = k} |d^alpha m|`` at each point (weight ``|xi|^k`` by default)."""
    if weight is None:
        weight = np.linalg.norm(reduce_to_fundamental(pts), axis=-1) ** k
    best = np.zeros(len(pts))
    for alpha in multi_indices(m.d, k):
        if method == "analytic" or (h is None and m.expr is None and m.table_step is not None):
            der = m.derivative(alpha, pts)
        elif method == "fd":
            hh = fd_step(m, pts, k) if h is None else h
            der = finite_difference(m, alpha, pts, np.asarray(hh, dtype=float)[..., None] if np.ndim(hh) else hh)
        else:
            raise ValueError(f"unknown derivative method {method!r}")
        best = np.maximum(best, np.abs(der))
    return weight * best


def mikhlin_constant(
    m: Symbol, max_order: int, N: int, method: str = "analytic", *, rim: int = 0, min_step: float = 1e-12
) -> MikhlinResult:
    """``sup |xi|^k max_{|alpha|=k} |d^alpha m(xi)|`` for ``k = 0..max_order``.

    The sup runs over the grid minus singular points and minus ``rim`` cell
    layers at the edge of the fundamental domain (derivatives here are always
    evaluated periodically, so no layer is needed by default).  With ``method="fd"`` the step
    shrinks near singular points; points whose step would fall below
    ``min_step`` are excluded and counted.
    """
    if not 0 <= max_order <= m.d + 1:
        raise ValueError(f"max_order must be in [0, {m.d + 1}]")
    if method == "analytic" and not m.has_analytic_derivatives:
        method = "fd"
    pts, n_sing, n_rim = _mikhlin_points(m, N, rim)
    n_under = 0
    if method == "fd":
        h = fd_step(m, pts, 1)
        ok = h >= min_step
        n_under = int(np.count_nonzero(~ok))
        pts = pts[ok]
    consts = []
    for k in range(max_order + 1):
        if k == 0:
            consts.append(float(np.abs(m.evaluate(pts)).max(initial=0.0)))
        else:
            consts.append(float(weighted_derivatives(m, k, pts, method).max(initial=0.0)))
    return MikhlinResult(N, method, consts, len(pts), n_sing, n_rim, n_under, "|xi|^k")


def mikhlin_constant_interval(
    m: Symbol, max_order: int, N: int, points: Sequence[float] | None = None, method: str = "analytic"
) -> MikhlinResult:
    """Interval form on (0, 1): weight ``prod_j |xi - a_j|^k``, default ``(xi (1 - xi))^k``.

    Grid points ``k / N`` in (0, 1) that coincide with a weight zero are excluded.
    """
    if m.d != 1:
        raise ValueError("the interval form is one-dimensional")
    if method == "analytic" and not m.has_analytic_derivatives:
        method = "fd"
    anchors = [0.0, 1.0] if points is None else [float(p) for p in points]
    x = np.arange(1, N) / N
    dist = np.min(np.abs(x[:, None] - np.asarray(anchors)[None, :]), axis=1)
    keep = dist > 0
    excluded = int(np.count_nonzero(~keep))
    x = x[keep]
    pts = x[:, None]
    consts = []
    for k in range(max_order + 1):
        w = np.prod(np.abs(x[:, None] - np.asarray(anchors)[None, :]) ** k, axis=1)
        if k == 0:
            consts.append(float(np.abs(m.evaluate(pts)).max()))
        else:
            near = np.min(np.abs(x[:, None] - np.asarray(anchors)), axis=1)
            h = FD_ETA.get(k, 0.03) * np.minimum(near, FD_REACH) if method == "fd" else None
            consts.append(float(weighted_derivatives(m, k, pts, method, weight=w, h=h).max()))
    name = "(xi(1-xi))^k" if points is None else "prod|xi-a_j|^k"
    return MikhlinResult(N, method, consts, len(x), excluded, 0, 0, name)


# Hormander sums and decay ---------------------------------------------------------------


def _ball_box(radius: float, d: int) -> LatticeBox:
    return LatticeBox.centered(int(math.ceil(radius)), d)


def hormander_sum(K: KernelTable | GridFunction, s, R: int) -> float:
    """``sum_{2|s| <= |r| <= R} |K(r - s) - K(r)|`` with Euclidean ``|.|``."""
    kern = K.kernel if isinstance(K, KernelTable) else K
    d = kern.d
    s = np.atleast_1d(np.asarray(s, dtype=np.int64))
    if s.shape != (d,):
        raise ValueError(f"shift must have length {d}")
    ns = float(np.linalg.norm(s))
    if ns == 0:
        raise ValueError("shift s must be nonzero")
    need = _ball_box(R + ns, d)
    if not kern.box.contains_box(need):
        raise ValueError(f"kernel box {kern.box} does not contain the ball of radius {R + ns:g}")
    rbox = LatticeBox.centered(R, d)
    r = rbox.points()
    nr = np.linalg.norm(r, axis=-1)
    sel = (nr >= 2 * ns) & (nr <= R)
    r = r[sel]
    vals = kern.values
    lo = np.asarray(kern.box.lo)
    a = vals[tuple((r - s - lo).T)]
    b = vals[tuple((r - lo).T)]
    return float(np.sum(np.abs(a - b)))


def shifts_up_to(S: int, d: int) -> np.ndarray:
    pts = LatticeBox.centered(S, d).points()
    n = np.linalg.norm(pts, axis=-1)
    return pts[(n > 0) & (n <= S)]


def hormander_constant_detail(K: KernelTable | GridFunction, S: int, R: int) -> tuple[float, list[int]]:
    kern = K.kernel if isinstance(K, KernelTable) else K
    best, arg = -1.0, None
    for s in shifts_up_to(S, kern.d):
        v = hormander_sum(kern, s, R)
        if v > best:
            best, arg = v, [int(c) for c in s]
    return best, arg


def hormander_constant(K: KernelTable | GridFunction, S: int, R: int) -> float:
    """``max_{0 < |s| <= S}`` of :func:`hormander_sum`."""
    return hormander_constant_detail(K, S, R)[0]


def decay_constants(K: KernelTable | GridFunction, d: int | None = None) -> tuple[float, float]:
    """``c_0 = max |K(n)| (1+|n|)^d`` and ``c_1 = max_j |K(n+e_j) - K(n)| (1+|n|)^{d+1}``."""
    kern = K.kernel if isinstance(K, KernelTable) else K
    d = kern.d if d is None else d
    pts = kern.box.points().reshape(kern.box.shape + (kern.d,))
    w = 1.0 + np.linalg.norm(pts, axis=-1)
    vals = kern.values
    c0 = float(np.max(np.abs(vals) * w**d))
    c1 = 0.0
    for j in range(kern.d):
        diff = np.abs(np.diff(vals, axis=j))
        wj = np.take(w, np.arange(vals.shape[j] - 1), axis=j)
        if diff.size:
            c1 = max(c1, float(np.max(diff * wj ** (d + 1))))
    return c0, c1


# operator norms ---------------------------------------------------------------------


@dataclass
class L2NormResult:
    value: float
    N: int
    singular_values: list[float]
    singular_exceeds: bool


def operator_norm_l2_detail(m: Symbol, N: int) -> L2NormResult:
    grid = TorusGrid.uniform(N, m.d)
    pts = grid.points().reshape(-1, m.d)
    a = np.abs(m.evaluate(pts))
    sing = m.singular_mask(pts)
    ess = float(a[~sing].max(initial=0.0))
    conv = [float(abs(v)) for v in m.conventions]
    return L2NormResult(ess, N, conv, any(v > ess for v in conv))


def operator_norm_l2(m: Symbol, N: int) -> float:
    """``max |m|`` over the grid; singular-point conventions do not enter."""
    return operator_norm_l2_detail(m, N).value


@dataclass
class NormEstimate:
    p: float
    q: float
    lower_bound: float
    method: str
    trials: int
    witness: GridFunction
    witness_id: str
    box: LatticeBox
    window: LatticeBox
    measure_box: LatticeBox
    grid_N: int
    seed: int | None = None
    history: dict = field(default_factory=dict)

    @property
    def rim(self) -> int:
        return self.window.radii[0] - self.measure_box.radii[0]

    def to_dict(self) -> dict:
        return {
            "p": _jnum(self.p),
            "q": _jnum(self.q),
            "lower_bound": self.lower_bound,
            "method": self.method,
            "trials": self.trials,
            "witness_id": self.witness_id,
            "box": self.box.to_dict(),
            "window": self.window.to_dict(),
            "measure_box": self.measure_box.to_dict(),
            "rim": self.rim,
            "grid_N": self.grid_N,
            "seed": self.seed,
            "history": self.history,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _jnum(x: float):
    return "inf" if math.isinf(x) else x


class FixedGridOperator:
    """``f -> (T_m f)`` restricted to ``measure_box``, on one fixed quadrature grid."""

    def __init__(self, m: Symbol, box: LatticeBox, measure_box: LatticeBox, grid: TorusGrid):
        self.m, self.box, self.measure_box, self.grid = m, box, measure_box, grid
        self._ms = m.samples(grid)
        self._mc = self._ms.values.conj()

    def __call__(self, f: GridFunction) -> GridFunction:
        return inverse_dft(forward_dft(f, self.grid) * self._ms, self.measure_box)

    def adjoint(self, g: GridFunction) -> GridFunction:
        u = forward_dft(g, self.grid)
        from .fourier import TorusSamples

        return inverse_dft(TorusSamples(self.grid, u.values * self._mc), self.box)

    def kernel_block(self) -> GridFunction:
        """Kernel values on ``measure_box - box`` (enough for every column)."""
        diff = LatticeBox(
            tuple(a - b for a, b in zip(self.measure_box.lo, self.box.hi)),
            tuple(a - b for a, b in zip(self.measure_box.hi, self.box.lo)),
        )
        return inverse_dft(self._ms, diff)

    def columns(self):
        """Column accessor ``j -> A[:, j]`` sliced from the kernel block."""
        kb = self.kernel_block()
        inp = self.box.points()
        shape = self.measure_box.shape
        base = np.asarray(self.measure_box.lo) - np.asarray(kb.box.lo)

        # A[out, in_j] = K(out - in_j): a shifted sub-block of the kernel
        def column(j: int) -> np.ndarray:
            off = base - inp[j]
            sl = tuple(slice(o, o + w) for o, w in zip(off, shape))
            return kb.values[sl].ravel()

        return column

    def matrix(self) -> np.ndarray:
        """Dense matrix ``A[i, j] = K(out_i - in_j)``."""
        kb = self.kernel_block()
        out = self.measure_box.points()
        inp = self.box.points()
        idx = out[:, None, :] - inp[None, :, :] - np.asarray(kb.box.lo)
        return kb.values[tuple(np.moveaxis(idx, -1, 0))]


def norm_ratio(op: FixedGridOperator, f: GridFunction, p: float, q: float) -> float:
    den = lp_norm(f, p)
    if den == 0:
        raise ValueError("zero input")
    return lp_norm(op(f), q) / den


# the norm search applies the operator hundreds of times, so its fixed grid is
# capped below the kernel-synthesis caps
NORM_GRID_CAPS = {1: 1 << 16, 2: 1 << 10, 3: 1 << 7}


def choose_norm_grid(m: Symbol, box: LatticeBox, window: LatticeBox, tol: float, cap: int | None = None) -> TorusGrid:
    """Grid on which ``T_m delta_0`` over ``window`` has converged to ``tol`` (or the cap)."""
    cap = NORM_GRID_CAPS[m.d] if cap is None else cap
    _, conv = apply_multiplier_detailed(
        m, GridFunction.delta(0, box.d, box), window, tol, cap=max(cap, 2 * max(window.shape)), accept_nonconverged=True
    )
    return TorusGrid.uniform(conv.N, m.d)


def _dual_map(y: np.ndarray, r: float) -> np.ndarray:
    """``|y|^{r-1} sign(y)``: the l^r duality map (up to normalisation)."""
    a = np.abs(y)
    out = np.zeros_like(y)
    nz = a > 0
    if math.isinf(r):
        top = a.max(initial=0.0)
        out[a == top] = y[a == top] / top if top > 0 else 0
        return out
    scale = a.max(initial=1.0) or 1.0
    out[nz] = (a[nz] / scale) ** (r - 1) * (y[nz] / a[nz])
    return out


def _conj_exp(p: float) -> float:
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1)


def operator_norm_lower_bound(
    m: Symbol,
    p: float,
    q: float,
    box: LatticeBox,
    trials: int = 20,
    *,
    seed: int = 0,
    tol: float = 1e-10,
    grid: TorusGrid | None = None,
    refine: bool = True,
    power_iters: int = 200,
    ascent_budget: int = 400,
    multiscale: bool = True,
) -> NormEstimate:
    """Best ratio ``||T_m f||_q / ||f||_p`` over a seeded candidate search.

    Inputs live on ``box`` (radius R); outputs are computed on the window of
    radius 2R and measured on the inner box of radius R.  Candidates: the
    delta probe and ``trials`` random complex Gaussian functions (on random
    sub-boxes when ``multiscale``).  With ``refine`` the best candidate is
    improved by power iteration (p = q = 2) or the nonlinear power iteration
    for general (p, q), then by coordinate ascent along kernel columns.
    """
    if not (1 < p < math.inf and 1 < q < math.inf):
        raise ValueError("need 1 < p, q < inf")
    d = box.d
    R = max(box.radii)
    window = LatticeBox.centered(2 * R, d)
    measure = LatticeBox.centered(R, d)
    if grid is None:
        grid = choose_norm_grid(m, box, window, tol)
    op = FixedGridOperator(m, box, measure, grid)
    rng_root = np.random.SeedSequence(seed)
    best_ratio, best_f, best_id, method = -1.0, None, "", "delta-probe"
    delta = GridFunction.delta(0, d, box)
    r0 = norm_ratio(op, delta, p, q)
    best_ratio, best_f, best_id = r0, delta, "delta"
    ratios = [r0]
    for i, ss in enumerate(rng_root.spawn(trials)):
        rng = np.random.default_rng(ss)
        f = _random_trial(box, rng, multiscale)
        r = norm_ratio(op, f, p, q)
        ratios.append(r)
        if r > best_ratio:
            best_ratio, best_f, best_id, method = r, f, f"trial-{i}", "random-search"
    hist = {"candidate_ratios": ratios}
    if refine:
        if p == 2 and q == 2:
            f, r = _power_iteration(op, best_f, power_iters)
        else:
            f, r = _nonlinear_power(op, best_f, p, q, power_iters)
        hist["power_ratio"] = r
        if r > best_ratio:
            best_ratio, best_f, best_id, method = r, f, best_id + "+power", "power-iteration"
        if ascent_budget > 0:
            f, r = _coordinate_ascent(op, best_f, p, q, ascent_budget, np.random.default_rng(rng_root.spawn(1)[0]))
            hist["ascent_ratio"] = r
            if r > best_ratio:
                best_ratio, best_f, best_id = r, f, best_id + "+ascent"
    # recompute from the witness so the bound is reproducible exactly
    best_ratio = norm_ratio(op, best_f, p, q)
    return NormEstimate(float(p), float(q), best_ratio, method, trials, best_f, best_id, box, window, measure,
                        grid.sizes[0], seed, hist)


def _random_trial(box: LatticeBox, rng: np.random.Generator, multiscale: bool) -> GridFunction:
    if not multiscale:
        return GridFunction.random(box, rng, "gaussian")
    R = max(box.radii)
    rho = int(math.floor(math.exp(rng.uniform(0.0, math.log(R + 1.0))))) - 1
    rho = max(rho, 0)
    center = [int(rng.integers(lo + rho, hi - rho + 1)) for lo, hi in zip(box.lo, box.hi)]
    sub = LatticeBox.centered(rho, box.d).shift(center)
    return GridFunction.random(sub, rng, "gaussian").on(box)


def _power_iteration(op: FixedGridOperator, f0: GridFunction, iters: int) -> tuple[GridFunction, float]:
    """Power iteration on ``A^* A``; returns the last iterate and its ratio."""
    f = f0 * (1.0 / lp_norm(f0, 2))
    prev = 0.0
    for _ in range(iters):
        y = op(f)
        r = lp_norm(y, 2)
        g = op.adjoint(y)
        nrm = lp_norm(g, 2)
        if nrm == 0 or abs(r - prev) <= 1e-10 * r:
            break
        prev = r
        f = g * (1.0 / nrm)
    return f, norm_ratio(op, f, 2, 2)


def _nonlinear_power(op: FixedGridOperator, f0: GridFunction, p: float, q: float, iters: int):
    """Nonlinear power iteration ``x <- J_{p'}(A^* J_q(A x))``, normalised each step."""
    f, best_f = f0, f0
    best = norm_ratio(op, f0, p, q)
    pc = _conj_exp(p)
    for _ in range(iters):
        y = op(f)
        z = op.adjoint(GridFunction(y.box, _dual_map(y.values, q)))
        x = _dual_map(z.values, pc)
        nx = lp_norm(GridFunction(z.box, x), p)
        if nx == 0:
            break
        f = GridFunction(z.box, x / nx)
        r = norm_ratio(op, f, p, q)
        if r > best * (1 + 1e-12):
            best, best_f = r, f
        elif r <= best:
            break
    return best_f, best


def _coordinate_ascent(op, f0: GridFunction, p: float, q: float, budget: int, rng):
    col = op.columns()
    x = f0.values.ravel().astype(np.complex128).copy()
    y = op(f0).values.ravel()

    def ratio(xv, yv):
        den = _lp(xv, p)
        return _lp(yv, q) / den if den > 0 else -math.inf

    best = ratio(x, y)
    steps = [1.0, -1.0, 1j, -1j]
    scale = np.abs(x).max()
    evals = 0
    while evals < budget and scale > 1e-6 * np.abs(x).max():
        improved = False
        for j in rng.permutation(len(x)):
            for c in steps:
                evals += 1
                dx = scale * c
                xn = x.copy()
                xn[j] += dx
                yn = y + dx * col(j)
                r = ratio(xn, yn)
                if r > best:
                    best, x, y, improved = r, xn, yn, True
                    break
            if evals >= budget:
                break
        if not improved:
            scale *= 0.5
    return GridFunction(f0.box, x.reshape(f0.box.shape)), best


def _lp(v: np.ndarray, p: float) -> float:
    a = np.abs(v)
    top = a.max(initial=0.0)
    if top == 0:
        return 0.0
    if math.isinf(p):
        return float(top)
    return float(top * np.sum((a / top) ** p) ** (1.0 / p))


@dataclass
class ExhaustiveNorm:
    p: float
    q: float
    value: float
    exact: bool
    method: str
    witness: GridFunction


def exhaustive_norm(m: Symbol, p: float, q: float, R: int, *, tol: float = 1e-12, grid: TorusGrid | None = None) -> ExhaustiveNorm:
    """Norm of the small operator matrix used by :func:`operator_norm_lower_bound` (d = 1, R <= 6).

    Exact for ``p = 1`` (largest column), ``q = inf`` (largest dual row norm)
    and ``p = q = 2`` (largest singular value).  Other pairs search the net
    of vectors with entries in ``{1, i, -1, -i}`` and are flagged inexact.
    """
    if m.d != 1 or R > 6:
        raise ValueError("exhaustive norms are limited to d = 1 and R <= 6")
    box = LatticeBox.centered(R, 1)
    measure = LatticeBox.centered(R, 1)
    window = LatticeBox.centered(2 * R, 1)
    if grid is None:
        grid = choose_norm_grid(m, box, window, tol)
    op = FixedGridOperator(m, box, measure, grid)
    A = op.matrix()
    n = A.shape[1]
    if p == 1:
        cols = [_lp(A[:, j], q) for j in range(n)]
        j = int(np.argmax(cols))
        x = np.zeros(n, complex)
        x[j] = 1
        return ExhaustiveNorm(p, q, cols[j], True, "max-column", GridFunction(box, x))
    if math.isinf(q):
        pc = _conj_exp(p)
        rows = [_lp(A[i], pc) for i in range(A.shape[0])]
        i = int(np.argmax(rows))
        x = _dual_map(A[i].conj(), pc)
        x = x / _lp(x, p)
        return ExhaustiveNorm(p, q, rows[i], True, "max-row", GridFunction(box, x))
    if p == 2 and q == 2:
        u, s, vh = np.linalg.svd(A)
        return ExhaustiveNorm(p, q, float(s[0]), True, "svd", GridFunction(box, vh[0].conj()))
    best, bx = -1.0, None
    phases = np.array([1, 1j, -1, -1j])
    # first entry fixed to 1 (global phase); at most 4^12 vectors for R = 6
    for combo in itertools.product(range(4), repeat=n - 1):
        x = np.concatenate([[1.0 + 0j], phases[list(combo)]])
        r = _lp(A @ x, q) / _lp(x, p)
        if r > best:
            best, bx = r, x
    return ExhaustiveNorm(p, q, best, False, "phase-net", GridFunction(box, bx))


# reports ----------------------------------------------------------------------------


@dataclass
class RegularityReport:
    tag: str
    d: int
    params: dict
    weak_lorentz: dict | None = None
    mikhlin: dict | None = None
    hormander: dict | None = None
    decay: dict | None = None
    deltas: list[dict] = field(default_factory=list)
    conventions: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=str)

    def table(self) -> str:
        lines = [f"symbol {self.tag} (d={self.d})"]
        for dl in self.deltas:
            lines.append(
                f"  {dl['quantity']:<24} {dl['coarse']:>14.8g} -> {dl['fine']:>14.8g}  "
                f"(change {100 * dl['relative_change']:.3g}%)"
            )
        return "\n".join(lines)


def weak_lorentz_study(m: Symbol, alpha: float, N: int, **kw) -> RegularityReport:
    a = weak_lorentz_detail(m, alpha, N, **kw)
    b = weak_lorentz_detail(m, alpha, 2 * N, **kw)
    rep = RegularityReport(m.tag, m.d, {"alpha": alpha, "N": N, "ladder": len(a.ladder) + a.excluded_levels, "min_cells": a.min_cells},
                           conventions=m.conventions_report())
    rep.weak_lorentz = {"coarse": asdict(a), "fine": asdict(b)}
    rep.deltas.append(_delta_entry("weak_lorentz", a.constant, b.constant, N, 2 * N))
    return rep


def mikhlin_study(m: Symbol, max_order: int, N: int, method: str = "analytic", rim: int = 0) -> RegularityReport:
    a = mikhlin_constant(m, max_order, N, method, rim=rim)
    b = mikhlin_constant(m, max_order, 2 * N, method, rim=rim)
    rep = RegularityReport(m.tag, m.d, {"max_order": max_order, "N": N, "method": a.method, "rim_cells": rim},
                           conventions=m.conventions_report())
    rep.mikhlin = {"coarse": asdict(a), "fine": asdict(b)}
    for k, (u, v) in enumerate(zip(a.constants, b.constants)):
        rep.deltas.append(_delta_entry(f"mikhlin_order_{k}", u, v, N, 2 * N))
    return rep


def hormander_study(m: Symbol, S: int, R: int, tol: float = 1e-8) -> RegularityReport:
    K = synthesize_kernel(m, LatticeBox.centered(2 * R + S, m.d), tol, accept_nonconverged=True)
    a, sa = hormander_constant_detail(K, S, R)
    b, sb = hormander_constant_detail(K, S, 2 * R)
    rep = RegularityReport(m.tag, m.d, {"S": S, "R": R, "tol": tol, "kernel_N": K.N,
                                        "aliasing_estimate": K.aliasing_estimate, "converged": K.converged},
                           conventions=m.conventions_report())
    rep.hormander = {"coarse": a, "coarse_shift": sa, "fine": b, "fine_shift": sb}
    rep.deltas.append(_delta_entry("hormander", a, b, R, 2 * R))
    return rep


def decay_study(m: Symbol, R: int, tol: float = 1e-8) -> RegularityReport:
    K2 = synthesize_kernel(m, LatticeBox.centered(2 * R, m.d), tol, accept_nonconverged=True)
    K1 = K2.kernel.on(LatticeBox.centered(R, m.d))
    c0a, c1a = decay_constants(K1)
    c0b, c1b = decay_constants(K2)
    rep = RegularityReport(m.tag, m.d, {"R": R, "tol": tol, "kernel_N": K2.N,
                                        "aliasing_estimate": K2.aliasing_estimate, "converged": K2.converged},
                           conventions=m.conventions_report())
    rep.decay = {"c0": [c0a, c0b], "c1": [c1a, c1b]}
    rep.deltas.append(_delta_entry("decay_c0", c0a, c0b, R, 2 * R))
    rep.deltas.append(_delta_entry("decay_c1", c1a, c1b, R, 2 * R))
    return rep
