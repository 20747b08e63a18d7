"""
Sweep configuration files.

Flat ``key = value`` text; ``#`` starts a comment. Lists are comma
separated and intervals are written ``lo:hi``. Example::

    sensors = 7
    spacing = 0.5
    snapshots = 30
    intervals = -30:-20, 0:10
    snr_db = 10, 0
    grid_interval = 1, 4, 10
    eta = 2
    trials = 200
    seed = 2016
    methods = root-sbl, ongrid-sbl
    output = results/sweep
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from rootsbl.array_model import ArrayGeometry
from rootsbl.errors import ContractError, RootSBLError
from rootsbl.estimators import ESTIMATORS


class ConfigError(RootSBLError):
    """Malformed or inconsistent sweep configuration."""


@dataclass(frozen=True)
class SweepConfig:
    geometry: ArrayGeometry = field(default_factory=lambda: ArrayGeometry(7, 0.5))
    snapshots: int = 30
    intervals: tuple = ((-30.0, -20.0), (0.0, 10.0))
    snr_db: tuple = (10.0,)
    grid_interval: tuple = (4.0,)
    eta: tuple = (2,)
    trials: int = 200
    master_seed: int = 2016
    methods: tuple = ("root-sbl",)
    max_iters: int = 500
    tol_delta: float = 1e-4
    workers: int = 1
    output: str = "sweep"

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.snapshots < 1:
            raise ConfigError("snapshots must be >= 1")
        ivs = sorted(self.intervals)
        for lo, hi in ivs:
            if not -90.0 < lo < hi < 90.0:
                raise ConfigError(f"interval [{lo}, {hi}] must satisfy -90 < lo < hi < 90")
        for (_, hi), (lo, _) in zip(ivs, ivs[1:]):
            if lo <= hi:
                raise ConfigError("source intervals overlap")
        if len(ivs) >= self.geometry.M:
            raise ConfigError("need fewer sources than sensors")
        for m in self.methods:
            if m not in ESTIMATORS:
                raise ConfigError(f"unknown method {m!r}; choose from {sorted(ESTIMATORS)}")
        for r in self.grid_interval:
            if not 0.0 < r <= 30.0:
                raise ConfigError(f"grid interval {r} outside (0, 30]")
        for e in self.eta:
            if e < 1:
                raise ConfigError("eta values must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    @property
    def source_count(self) -> int:
        return len(self.intervals)


def _floats(text):
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _ints(text):
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


def _intervals(text):
    out = []
    for tok in text.split(","):
        lo, hi = tok.split(":")
        out.append((float(lo), float(hi)))
    return tuple(out)


_KEYS = {
    "sensors": ("sensors", int),
    "spacing": ("spacing", float),
    "snapshots": ("snapshots", int),
    "intervals": ("intervals", _intervals),
    "snr_db": ("snr_db", _floats),
    "grid_interval": ("grid_interval", _floats),
    "eta": ("eta", _ints),
    "trials": ("trials", int),
    "seed": ("master_seed", int),
    "methods": ("methods", lambda s: tuple(t.strip() for t in s.split(",") if t.strip())),
    "max_iters": ("max_iters", int),
    "tol_delta": ("tol_delta", float),
    "workers": ("workers", int),
    "output": ("output", str.strip),
}


def parse_config(text: str) -> SweepConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        name, conv = _KEYS[key]
        try:
            values[name] = conv(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    sensors = values.pop("sensors", 7)
    spacing = values.pop("spacing", 0.5)
    try:
        values["geometry"] = ArrayGeometry(sensors, spacing)
        return SweepConfig(**values)
    except ContractError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> SweepConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
