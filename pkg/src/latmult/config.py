"""Experiment configuration: JSON parsing, validation and defaults."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Any

COMMANDS = (
    "kernel",
    "apply",
    "verify-mikhlin",
    "verify-weak",
    "verify-hormander",
    "verify-decay",
    "norm",
    "wave",
    "strichartz",
    "selftest",
)
RANDOMIZED = {"norm", "strichartz"}
NEEDS_SYMBOL = {"kernel", "apply", "verify-mikhlin", "verify-weak", "verify-hormander", "verify-decay", "norm"}


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending key when known."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


@dataclass
class ExperimentConfig:
    command: str
    symbol: str | None = None
    d: int = 1
    box: int = 16
    window: int | None = None
    grid: int | None = None
    tol: float = 1e-10
    seed: int | None = None
    out: str = "out"
    p: float = 2.0
    q: float = 2.0
    alpha: float = 2.0
    max_order: int | None = None
    method: str = "analytic"
    S: int = 8
    R: int = 64
    t: float = 1.0
    times: list[float] = field(default_factory=lambda: [1.0])
    trials: int = 20
    f: str = "delta"
    g: str = "zero"
    input: str | None = None
    refine: bool = True
    accept_nonconverged: bool = False
    threads: int | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("p", "q"):
            if math.isinf(d[k]):
                d[k] = "inf"
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


_TYPES: dict[str, Any] = {f.name: f.type for f in fields(ExperimentConfig)}


def _as_int(name: str, v) -> int:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or (isinstance(v, float) and not v.is_integer()):
        raise ConfigError(f"field {name!r} must be an integer, got {v!r}", name)
    return int(v)


def _as_float(name: str, v) -> float:
    if isinstance(v, str) and v.strip().lower() in ("inf", "infinity"):
        return math.inf
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"field {name!r} must be a number, got {v!r}", name)
    return float(v)


def _as_bool(name: str, v) -> bool:
    if not isinstance(v, bool):
        raise ConfigError(f"field {name!r} must be true or false, got {v!r}", name)
    return v


def _as_str(name: str, v) -> str:
    if not isinstance(v, str):
        raise ConfigError(f"field {name!r} must be a string, got {v!r}", name)
    return v


def _coerce(name: str, v):
    kind = _TYPES[name]
    if v is None:
        if "None" in str(kind):
            return None
        raise ConfigError(f"field {name!r} may not be null", name)
    if name == "times":
        if not isinstance(v, list) or not v:
            raise ConfigError("field 'times' must be a non-empty list of numbers", name)
        return [_as_float(name, x) for x in v]
    if "int" in str(kind):
        return _as_int(name, v)
    if "float" in str(kind):
        return _as_float(name, v)
    if "bool" in str(kind):
        return _as_bool(name, v)
    return _as_str(name, v)


def from_mapping(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = sorted(set(data) - set(_TYPES))
    if unknown:
        raise ConfigError(f"unknown configuration key {unknown[0]!r}", unknown[0])
    if "command" not in data:
        raise ConfigError("missing required field 'command'", "command")
    kw = {k: _coerce(k, v) for k, v in data.items()}
    cfg = ExperimentConfig(**kw)
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}; expected one of {', '.join(COMMANDS)}", "command")
    if not 1 <= cfg.d <= 3:
        raise ConfigError("field 'd' must be 1, 2 or 3", "d")
    if cfg.command in NEEDS_SYMBOL and not cfg.symbol:
        raise ConfigError(f"command {cfg.command!r} needs a 'symbol'", "symbol")
    if cfg.command in RANDOMIZED and cfg.seed is None:
        raise ConfigError(f"command {cfg.command!r} is randomized and needs a 'seed'", "seed")
    if cfg.command == "wave" and "random" in (cfg.f, cfg.g) and cfg.seed is None:
        raise ConfigError("random wave data need a 'seed'", "seed")
    for name in ("box", "R", "S", "trials"):
        if getattr(cfg, name) < (0 if name == "box" else 1):
            raise ConfigError(f"field {name!r} out of range", name)
    if cfg.window is not None and cfg.window < 0:
        raise ConfigError("field 'window' must be nonnegative", "window")
    if cfg.grid is not None and (cfg.grid < 2 or cfg.grid % 2):
        raise ConfigError("field 'grid' must be an even integer >= 2", "grid")
    if not cfg.tol > 0:
        raise ConfigError("field 'tol' must be positive", "tol")
    if cfg.seed is not None and not 0 <= cfg.seed < 2**64:
        raise ConfigError("field 'seed' must be an unsigned 64-bit integer", "seed")
    if cfg.method not in ("analytic", "fd"):
        raise ConfigError("field 'method' must be 'analytic' or 'fd'", "method")
    if cfg.p < 1 or cfg.q < 1:
        raise ConfigError("fields 'p' and 'q' must be >= 1", "p" if cfg.p < 1 else "q")
    if cfg.max_order is not None and not 0 <= cfg.max_order <= cfg.d + 1:
        raise ConfigError(f"field 'max_order' must be in [0, {cfg.d + 1}]", "max_order")
    if cfg.threads is not None and cfg.threads < 1:
        raise ConfigError("field 'threads' must be >= 1", "threads")


def load_json(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    return data


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a JSON configuration; errors carry line/column or the field name."""
    return from_mapping(load_json(text))


def normalize(data: dict) -> dict:
    """The fully defaulted form of a raw configuration mapping."""
    return from_mapping(data).to_dict()


def serialize(cfg: ExperimentConfig) -> str:
    return cfg.to_json()


def parse_assignment(text: str) -> tuple[str, Any]:
    """``KEY=VALUE`` from the command line; VALUE is read as JSON when possible."""
    if "=" not in text:
        raise ConfigError(f"expected KEY=VALUE, got {text!r}")
    key, raw = text.split("=", 1)
    key = key.strip()
    try:
        val = json.loads(raw)
    except json.JSONDecodeError:
        val = raw
    return key, val
