"""Run configuration shared by the command-line front end.

Values come from, in increasing priority: defaults, the environment
(``GENPOLY_PRECISION_CAP``), a ``key = value`` file, and explicit overrides.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields, replace
from fractions import Fraction

from .errors import PreconditionError
from .intervals import PrecisionPolicy

ENV_PRECISION_CAP = "GENPOLY_PRECISION_CAP"
FORMATS = ("json", "csv", "text")


@dataclass(frozen=True)
class RunConfig:
    precision_start: int = 128
    precision_cap: int = 4096
    N: int = 1000
    eps: Fraction = Fraction(1, 8)
    delta: Fraction = Fraction(1, 10)
    window_cap: int = 10 ** 7
    horizon: int = 10 ** 5
    format: str = "json"
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "eps", Fraction(self.eps))
        object.__setattr__(self, "delta", Fraction(self.delta))
        for name in ("precision_start", "precision_cap", "N", "window_cap", "horizon", "jobs"):
            if getattr(self, name) <= 0:
                raise PreconditionError(f"{name} must be positive")
        if self.precision_start > self.precision_cap:
            raise PreconditionError("precision_start exceeds precision_cap")
        if not 0 < self.eps < Fraction(1, 4):
            raise PreconditionError("eps must lie in (0, 1/4)")
        if not 0 < self.delta <= Fraction(1, 2):
            raise PreconditionError("delta must lie in (0, 1/2]")
        if self.format not in FORMATS:
            raise PreconditionError(f"format must be one of {', '.join(FORMATS)}")

    @property
    def policy(self):
        return PrecisionPolicy(self.precision_start, self.precision_cap)

    def to_json(self):
        out = asdict(self)
        out["eps"] = str(self.eps)
        out["delta"] = str(self.delta)
        return out

    def with_updates(self, updates):
        return replace(self, **_coerce(updates))


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(raw):
    out = {}
    for key, value in raw.items():
        key = key.strip().replace("-", "_")
        if key not in _TYPES:
            raise PreconditionError(f"unknown config key {key!r}")
        if not isinstance(value, str):
            out[key] = value
            continue
        value = value.strip()
        kind = _TYPES[key]
        try:
            if kind in ("int", int):
                out[key] = int(float(value)) if "e" in value.lower() else int(value)
            elif kind in ("Fraction", Fraction):
                out[key] = Fraction(value)
            else:
                out[key] = value
        except ValueError:
            raise PreconditionError(f"bad value for {key}: {value!r}") from None
    return out


def parse_config_text(text):
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise PreconditionError(f"config line {lineno}: expected key = value")
        k, v = line.split("=", 1)
        raw[k] = v
    return raw


def load_config(path=None, overrides=None, environ=None):
    environ = os.environ if environ is None else environ
    raw = {}
    if environ.get(ENV_PRECISION_CAP):
        raw["precision_cap"] = environ[ENV_PRECISION_CAP]
    if path:
        with open(path, encoding="utf-8") as fh:
            raw.update(parse_config_text(fh.read()))
    raw.update(overrides or {})
    return RunConfig(**_coerce(raw))
