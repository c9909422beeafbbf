"""Flat ``key = value`` run configuration with per-key provenance."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    pass


def _bool(v: str) -> bool:
    low = v.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _float(v: str) -> float:
    v = v.strip()
    if v.lower() in ("inf", "infinity"):
        return math.inf
    if "/" in v:
        a, b = v.split("/")
        return float(a) / float(b)
    return float(v)


def _floats(v: str) -> tuple:
    return tuple(_float(x) for x in v.replace(",", " ").split())


def _complexes(v: str) -> tuple:
    return tuple(complex(x.replace(" ", "")) for x in v.split(","))


# key -> (parser, default, help)
SCHEMA = {
    "dim": (int, 1, "spatial dimension d"),
    "N": (int, 256, "grid points per axis (power of two)"),
    "L": (_float, 16.0, "box half-width; domain [-L, L)^d"),
    "gamma": (_float, 0.5, "Riesz exponent, 0 < gamma < d"),
    "lambda": (_float, 1.0, "coupling constant (0 switches the nonlinearity off)"),
    "mass": (_float, 1.0, "mass m >= 0"),
    "T": (_float, 0.1, "final time"),
    "nt": (int, 65, "number of time nodes"),
    "quad": (str, "simpson", "time quadrature: simpson | trapezoid"),
    "tol": (_float, 1e-10, "relative Picard tolerance"),
    "maxiter": (int, 50, "Picard iteration cap"),
    "init": (str, "free", "first Picard iterate: free | zero"),
    "zero_mode": (str, "zeta", "Riesz multiplier at xi = 0: zeta | cell | zero"),
    "norm.kind": (str, "mod", "monitored norm: mod | fl | sobolev | lp"),
    "norm.p": (_float, 2.0, "monitored norm p"),
    "norm.q": (_float, None, "monitored norm q (default 2d/(d+gamma))"),
    "norm.s": (_float, 0.0, "monitored norm weight s"),
    "norm.window": (_float, 1.0, "Gaussian window width"),
    "norm.x_stride": (int, 1, "lattice stride in x (grid steps)"),
    "norm.xi_stride": (int, 1, "lattice stride in xi (grid steps)"),
    "solver": (str, "both", "picard | split | both"),
    "split.substeps": (int, 1, "splitting substeps per time step"),
    "monitor.factor": (_float, 10.0, "growth factor flagged by the blow-up monitor"),
    "data.input": (str, "", "initial field .bin (overrides the Gaussian below)"),
    "data.width": (_float, 1.0, "Gaussian width"),
    "data.center": (_floats, (), "Gaussian center (d numbers, default origin)"),
    "data.modulation": (_floats, (), "Gaussian carrier frequency (d numbers)"),
    "data.weights": (_complexes, (1.0, 0.5j), "component weights, comma separated"),
    "data.l2": (_float, 0.1, "L2 norm of the initial datum (<= 0 keeps the raw amplitude)"),
    "threads": (int, None, "FFT worker threads (default: available cores)"),
    "out": (str, "run", "output prefix"),
    "precision": (str, "double", "field output precision: double | single"),
}


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    @classmethod
    def defaults(cls) -> "RunConfig":
        return cls({k: v[1] for k, v in SCHEMA.items()}, {k: "default" for k in SCHEMA})

    @classmethod
    def load(cls, path=None, overrides=()) -> "RunConfig":
        cfg = cls.defaults()
        if path is not None:
            cfg.update(parse_text(Path(path).read_text(), str(path)), "file")
        cfg.update(dict(parse_assignment(a) for a in overrides), "flag")
        return cfg

    def update(self, raw: dict, source: str) -> None:
        for key, text in raw.items():
            if key not in SCHEMA:
                raise ConfigError(f"unknown config key {key!r}")
            parser = SCHEMA[key][0]
            try:
                self.values[key] = parser(text) if isinstance(text, str) else text
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {text!r} ({exc})") from None
            self.provenance[key] = source

    def __getitem__(self, key):
        if key not in SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        return self.values[key]

    def get(self, key, default=None):
        v = self[key]
        return default if v is None else v

    @property
    def threads(self) -> int:
        return self.get("threads", os.cpu_count() or 1)

    def resolved(self) -> dict:
        """Every key with its value and where it came from."""
        def enc(v):
            if isinstance(v, tuple):
                return [enc(x) for x in v]
            if isinstance(v, complex):
                return repr(v)
            if isinstance(v, float) and math.isinf(v):
                return "inf"
            return v
        return {k: {"value": enc(self.values[k]), "source": self.provenance[k]} for k in SCHEMA}

    def to_text(self) -> str:
        """Flat ``key = value`` text that reproduces this configuration."""
        lines = []
        for k in SCHEMA:
            v = self.values[k]
            if v is None:
                continue
            if isinstance(v, tuple):
                sep = ", " if k == "data.weights" else " "
                v = sep.join(repr(x) if isinstance(x, complex) else repr(float(x)) for x in v)
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"


def parse_assignment(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise ConfigError(f"expected key=value, got {text!r}")
    k, v = text.split("=", 1)
    return k.strip(), v.strip()


def parse_text(text: str, origin: str = "<config>") -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            k, v = parse_assignment(line)
        except ConfigError:
            raise ConfigError(f"{origin}:{lineno}: expected key = value") from None
        if k in out:
            raise ConfigError(f"{origin}:{lineno}: duplicate key {k!r}")
        out[k] = v
    return out
