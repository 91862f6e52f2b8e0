"""Run configuration: defaults < config file < environment < command-line flags.

The config file holds ``key = value`` lines (``#`` starts a comment) with
keys ``order``, ``tol``, ``seed``, ``format`` and ``precision``.  Environment
variables use the prefix ``MONOPOLE_MODULI_``, e.g. ``MONOPOLE_MODULI_TOL``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from pathlib import Path

ENV_PREFIX = "MONOPOLE_MODULI_"
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Config:
    order: Fraction = Fraction(30)
    tol: float = 1e-10
    seed: int = 0
    format: str = "csv"
    precision: int = 17

    def __post_init__(self):
        if self.order <= 0:
            raise ConfigError("order must be positive")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.precision < 6:
            raise ConfigError("precision must be at least 6")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")


_PARSERS = {"order": Fraction, "tol": float, "seed": int, "format": str.lower, "precision": int}


def _coerce(values: dict, source: str) -> dict:
    out = {}
    for key, raw in values.items():
        if key not in _PARSERS:
            raise ConfigError(f"{source}: unknown key {key!r}")
        try:
            out[key] = _PARSERS[key](str(raw).strip()) if isinstance(raw, str) else raw
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{source}: bad value for {key}: {raw!r}") from exc
    return out


def read_config_file(path) -> dict:
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.lower()] = value
    return _coerce(values, str(path))


def read_env(environ=None) -> dict:
    environ = os.environ if environ is None else environ
    values = {}
    for f in fields(Config):
        name = ENV_PREFIX + f.name.upper()
        if name in environ:
            values[f.name] = environ[name]
    return _coerce(values, "environment")


def resolve(config_file=None, flags: dict | None = None, environ=None) -> Config:
    """Merge the layers; ``None`` flag values are ignored."""
    merged: dict = {}
    if config_file is not None:
        merged.update(read_config_file(config_file))
    merged.update(read_env(environ))
    if flags:
        merged.update(_coerce({k: v for k, v in flags.items() if v is not None}, "flags"))
    return replace(Config(), **merged)
