"""Command-line frontend: ``latmult COMMAND [--config PATH] [--set KEY=VALUE ...]``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy.fft

from . import __version__
from .config import COMMANDS, ConfigError, ExperimentConfig, from_mapping, load_json, parse_assignment
from .lattice import GridFunction, LatticeBox
from .multipliers import NonConvergenceError, apply_multiplier_detailed, synthesize_kernel
from .symbols import SymbolSyntaxError, parse_symbol

log = logging.getLogger("latmult")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NONCONVERGENCE, EXIT_IO = 0, 1, 2, 3, 4


def write_atomic(path: Path, text: str) -> Path:
    """Write through a temporary file in the same directory, then rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


class Run:
    """Collects outputs of one command and stamps reports with provenance."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.out = Path(cfg.out)
        self.files: list[Path] = []
        self.started = time.perf_counter()
        self.stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")

    def write(self, name: str, text: str) -> Path:
        p = write_atomic(self.out / name, text)
        self.files.append(p)
        return p

    def report(self, name: str, body: dict) -> Path:
        doc = {
            "command": self.cfg.command,
            "config": self.cfg.to_dict(),
            "seed": self.cfg.seed,
            "version": __version__,
            "started_utc": self.stamp,
            "wall_clock_seconds": round(time.perf_counter() - self.started, 6),
            "result": body,
        }
        return self.write(name, json.dumps(_jsonable(doc), indent=2) + "\n")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, LatticeBox):
        return x.to_dict()
    return x


def _symbol(cfg: ExperimentConfig):
    try:
        return parse_symbol(cfg.symbol, cfg.d)
    except SymbolSyntaxError as exc:
        raise ConfigError(f"field 'symbol': {exc}", "symbol") from exc


def _window(cfg: ExperimentConfig) -> LatticeBox:
    return LatticeBox.centered(cfg.box if cfg.window is None else cfg.window, cfg.d)


def _rng(cfg: ExperimentConfig, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([cfg.seed or 0, stream]))


def load_data(spec: str, cfg: ExperimentConfig, stream: int) -> GridFunction | None:
    """Initial data: ``zero``, ``delta``, ``gaussian-profile``, ``random`` or ``csv:PATH``."""
    box = LatticeBox.centered(cfg.box, cfg.d)
    if spec == "zero":
        return None
    if spec == "delta":
        return GridFunction.delta(0, cfg.d)
    if spec == "gaussian-profile":
        sigma = max(cfg.box / 3.0, 1.0)
        return GridFunction.from_callable(box, lambda n: np.exp(-np.sum(n.astype(float) ** 2, axis=1) / (2 * sigma**2)))
    if spec == "random":
        return GridFunction.random(box, _rng(cfg, stream), "gaussian")
    if spec.startswith("csv:"):
        f = GridFunction.from_csv(Path(spec[4:]).read_text())
        if f.d != cfg.d:
            raise ConfigError(f"data file {spec[4:]} has dimension {f.d}, config says {cfg.d}", "d")
        return f
    raise ConfigError(f"unknown data spec {spec!r}", "f")


# commands -------------------------------------------------------------------------


def cmd_kernel(run: Run):
    cfg = run.cfg
    m = _symbol(cfg)
    K = synthesize_kernel(m, LatticeBox.centered(cfg.box, cfg.d), cfg.tol, accept_nonconverged=cfg.accept_nonconverged)
    run.write("kernel.csv", K.to_csv())
    run.report("kernel.json", {**K.metadata(), "conventions": m.conventions_report()})
    return f"kernel {m.tag}: N={K.N}, aliasing estimate {K.aliasing_estimate:.3g}"


def cmd_apply(run: Run):
    cfg = run.cfg
    m = _symbol(cfg)
    f = load_data(f"csv:{cfg.input}" if cfg.input else cfg.f, cfg, 0)
    if f is None:
        raise ConfigError("apply needs nonzero input data", "f")
    out, conv = apply_multiplier_detailed(m, f, _window(cfg), cfg.tol, accept_nonconverged=cfg.accept_nonconverged)
    run.write("apply.csv", out.to_csv())
    run.report("apply.json", {"symbol": m.tag, "window": _window(cfg).to_dict(), "convergence": conv.to_dict(),
                              "conventions": m.conventions_report()})
    return f"applied {m.tag}: N={conv.N}, last change {conv.difference:.3g}"


def cmd_verify_mikhlin(run: Run):
    from .regularity import mikhlin_study

    cfg = run.cfg
    m = _symbol(cfg)
    rep = mikhlin_study(m, cfg.d + 1 if cfg.max_order is None else cfg.max_order, cfg.grid or 64, cfg.method)
    run.report("mikhlin.json", rep.to_dict())
    return rep.table()


def cmd_verify_weak(run: Run):
    from .regularity import weak_lorentz_study

    cfg = run.cfg
    m = _symbol(cfg)
    rep = weak_lorentz_study(m, cfg.alpha, cfg.grid or 256)
    lines = ["resolution,s,value"]
    for tag in ("coarse", "fine"):
        w = rep.weak_lorentz[tag]
        lines += [f"{w['N']},{s!r},{v!r}" for s, v in zip(w["ladder"], w["values"])]
    run.write("weak_ladder.csv", "\n".join(lines) + "\n")
    run.report("weak.json", rep.to_dict())
    return rep.table()


def cmd_verify_hormander(run: Run):
    from .regularity import hormander_study

    cfg = run.cfg
    m = _symbol(cfg)
    rep = hormander_study(m, cfg.S, cfg.R, min(cfg.tol, 1e-6))
    run.report("hormander.json", rep.to_dict())
    return rep.table()


def cmd_verify_decay(run: Run):
    from .regularity import decay_study

    cfg = run.cfg
    m = _symbol(cfg)
    rep = decay_study(m, cfg.box, min(cfg.tol, 1e-6))
    run.report("decay.json", rep.to_dict())
    return rep.table()


def cmd_norm(run: Run):
    from .regularity import exhaustive_norm, operator_norm_l2_detail, operator_norm_lower_bound

    cfg = run.cfg
    m = _symbol(cfg)
    body: dict = {"symbol": m.tag}
    lines = []
    if cfg.p == 2 and cfg.q == 2:
        l2 = operator_norm_l2_detail(m, cfg.grid or 1024)
        body["l2_norm"] = l2.__dict__
        lines.append(f"sup |m| on grid {l2.N}: {l2.value:.10g}")
    exhaustive = m.d == 1 and cfg.box <= 6 and (cfg.p in (1, 2, math.inf) and cfg.q in (1, 2, math.inf))
    if 1 < cfg.p < math.inf and 1 < cfg.q < math.inf:
        est = operator_norm_lower_bound(m, cfg.p, cfg.q, LatticeBox.centered(cfg.box, cfg.d), cfg.trials,
                                        seed=cfg.seed, tol=cfg.tol, refine=cfg.refine)
        body["estimate"] = est.to_dict()
        run.write("witness.csv", est.witness.to_csv())
        run.write("candidate_ratios.csv", "candidate,ratio\n" + "".join(
            f"{i},{r!r}\n" for i, r in enumerate(est.history["candidate_ratios"])))
        lines.append(f"lower bound ({est.method}, witness {est.witness_id}): {est.lower_bound:.10g}")
    if exhaustive:
        ex = exhaustive_norm(m, cfg.p, cfg.q, cfg.box, tol=cfg.tol)
        body["exhaustive"] = {"value": ex.value, "exact": ex.exact, "method": ex.method}
        lines.append(f"small-box norm ({ex.method}, exact={ex.exact}): {ex.value:.10g}")
    if len(body) == 1:
        raise ConfigError("norm: need 1 < p, q < inf, or d = 1 with box <= 6 for p, q in {1, 2, inf}", "p")
    run.report("norm.json", body)
    return "\n".join(lines)


def cmd_wave(run: Run):
    from .wave import energy, solve_wave

    cfg = run.cfg
    f = load_data(cfg.f, cfg, 1)
    g = load_data(cfg.g, cfg, 2)
    if f is None and g is None:
        raise ConfigError("wave needs nonzero initial data", "f")
    data_box = (f or g).box if (f is None or g is None) else f.box.hull(g.box)
    window = _window(cfg) if cfg.window is not None else data_box.expand(int(math.ceil(max(map(abs, cfg.times)))) + 16)
    summary = []
    for t in cfg.times:
        st = solve_wave(f, g, t, window, cfg.tol, accept_nonconverged=cfg.accept_nonconverged)
        run.write(f"wave_t{t:g}.csv", st.to_csv())
        summary.append({"t": t, "energy": energy(st)})
    run.report("wave.json", {"window": window.to_dict(), "f": cfg.f, "g": cfg.g, "states": summary})
    return "\n".join(f"t={s['t']:g}: energy {s['energy']:.12g}" for s in summary)


def cmd_strichartz(run: Run):
    from .wave import strichartz_study

    cfg = run.cfg
    rep = strichartz_study(cfg.p, cfg.q, cfg.t, cfg.d, cfg.box, cfg.trials, cfg.seed, tol=cfg.tol)
    run.write("strichartz.csv", rep.ratios_csv())
    run.report("strichartz.json", rep.to_dict())
    return f"max ratio over {len(rep.ratios)} candidates: {rep.max_ratio:.10g} ({rep.argmax_label})"


def cmd_selftest(run: Run):
    from .acceptance import run_all

    if run.cfg.seed is None:
        run.cfg.seed = 0
    results = run_all(seed=run.cfg.seed)
    run.report("selftest.json", {"criteria": [r.to_dict() for r in results], "passed": all(r.passed for r in results)})
    text = "\n".join(r.line() for r in results)
    return text, all(r.passed for r in results)


HANDLERS = {
    "kernel": cmd_kernel,
    "apply": cmd_apply,
    "verify-mikhlin": cmd_verify_mikhlin,
    "verify-weak": cmd_verify_weak,
    "verify-hormander": cmd_verify_hormander,
    "verify-decay": cmd_verify_decay,
    "norm": cmd_norm,
    "wave": cmd_wave,
    "strichartz": cmd_strichartz,
    "selftest": cmd_selftest,
}


def dispatch(cfg: ExperimentConfig) -> tuple[int, list[Path], str]:
    """Run one command; returns (exit status, files written, summary text)."""
    run = Run(cfg)
    with scipy.fft.set_workers(cfg.threads or 1):
        res = HANDLERS[cfg.command](run)
    ok = True
    if isinstance(res, tuple):
        res, ok = res
    return (EXIT_OK if ok else EXIT_FAILED), run.files, res


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="latmult", description="Fourier multipliers on the integer lattice.")
    ap.add_argument("command", nargs="?", choices=COMMANDS, help="command (overrides the config file)")
    ap.add_argument("--config", type=Path, help="JSON configuration file")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config field")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--seed", type=int, help="run seed (unsigned 64-bit)")
    ap.add_argument("--threads", type=int, help="FFT worker threads")
    ap.add_argument("--quiet", action="store_true", help="suppress the summary on stdout")
    ap.add_argument("--version", action="version", version=f"latmult {__version__}")
    return ap


def _error(code: int, kind: str, message: str, extra: dict | None = None) -> int:
    doc = {"error": kind, "message": message, "exit_code": code, **(extra or {})}
    print(json.dumps(doc), file=sys.stderr)
    return code


def load_config(args) -> ExperimentConfig:
    data: dict = {}
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc.strerror}") from exc
        data = load_json(text)
    for item in args.set:
        k, v = parse_assignment(item)
        data[k] = v
    if args.command:
        data["command"] = args.command
    if args.out:
        data["out"] = args.out
    if args.seed is not None:
        data["seed"] = args.seed
    if args.threads is not None:
        data["threads"] = args.threads
    return from_mapping(data)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        return _error(EXIT_CONFIG, "config", str(exc), {"field": exc.field})
    try:
        code, files, text = dispatch(cfg)
    except ConfigError as exc:
        return _error(EXIT_CONFIG, "config", str(exc), {"field": exc.field})
    except NonConvergenceError as exc:
        return _error(EXIT_NONCONVERGENCE, "nonconvergence", str(exc), {"convergence": exc.convergence.to_dict()})
    except OSError as exc:
        return _error(EXIT_IO, "io", str(exc))
    if not args.quiet:
        print(text)
        for p in files:
            print(f"wrote {p}")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
