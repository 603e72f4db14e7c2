"""Experiment configuration: a flat ``key = value`` text format.

Example::

    experiment = decay_vs_m
    set = sparse
    n = 512
    k = 4
    sensing = gaussian
    deltas = 0.5, 1, 2
    m_grid = geometric(112, 512, 12)
    trials = 100
    base_seed = 7
    dithering = on

Lines starting with ``#`` are comments.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from ..sensing import KINDS

EXPERIMENTS = ("decay_vs_m", "error_vs_delta", "no_dither", "diagnose")
SETS = ("sparse", "compressible", "lowrank")
DEFAULT_GRID_POINTS = 12

_GEOMETRIC = re.compile(r"geometric\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)$")


def geometric_grid(m_min: int, m_max: int, points: int) -> list[int]:
    """Geometrically spaced integers from m_min to m_max (duplicates after rounding dropped)."""
    if points == 1:
        return [int(m_max)]
    grid = np.unique(np.round(np.geomspace(m_min, m_max, points)).astype(int))
    return [int(m) for m in grid]


@dataclass
class ExperimentConfig:
    experiment: str = "decay_vs_m"
    set: str = "sparse"
    n: int = 512
    k: int = 4
    n1: int = 0
    n2: int = 0
    r: int = 0
    sensing: str = "gaussian"
    deltas: list = field(default_factory=lambda: [1.0])
    m_grid: list = field(default_factory=list)
    trials: int = 100
    base_seed: int = 0
    dithering: bool = True
    output: str | None = None
    experiment_id: str = ""
    audit_samples: int = 2000

    def __post_init__(self):
        if self.set == "lowrank":
            self.n = self.n1 * self.n2
        if not self.m_grid:
            self.m_grid = geometric_grid(self.m_min, self.n, DEFAULT_GRID_POINTS)
        if not self.experiment_id:
            self.experiment_id = self.experiment
        self.validate()

    @property
    def k_or_r(self) -> int:
        return self.r if self.set == "lowrank" else self.k

    @property
    def m_min(self) -> int:
        """Smallest m of the default grid: 4k log2(n/k), or r(n1 + n2) for matrices."""
        if self.set == "lowrank":
            return self.r * (self.n1 + self.n2)
        return max(1, math.ceil(4 * self.k * math.log2(self.n / self.k)))

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if self.set not in SETS:
            raise ConfigError(f"set must be one of {SETS}, got {self.set!r}")
        if self.sensing not in KINDS:
            raise ConfigError(f"sensing must be one of {KINDS}, got {self.sensing!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.set == "lowrank":
            if min(self.n1, self.n2) < 1 or not 1 <= self.r <= min(self.n1, self.n2):
                raise ConfigError(f"invalid low-rank shape {self.n1}x{self.n2}, r={self.r}")
        elif not 1 <= self.k <= self.n:
            raise ConfigError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if not self.deltas or any(not (math.isfinite(d) and d > 0) for d in self.deltas):
            raise ConfigError(f"deltas must be finite and > 0, got {self.deltas}")
        if not self.m_grid or any(m < 1 or m > self.n for m in self.m_grid):
            raise ConfigError(f"m values must lie in [1, n={self.n}], got {self.m_grid}")
        if self.experiment == "diagnose" and self.set == "compressible":
            raise ConfigError("diagnose audits structured sets only (sparse, lowrank)")

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        raw = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            raw[key] = value
        return cls(**_convert(raw))

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_text(text)


_INT_KEYS = ("n", "k", "n1", "n2", "r", "trials", "base_seed", "audit_samples")
_STR_KEYS = ("experiment", "set", "sensing", "output", "experiment_id")


def _convert(raw: dict) -> dict:
    known = set(_INT_KEYS + _STR_KEYS + ("deltas", "m_grid", "dithering"))
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    out = {}
    try:
        for key in _INT_KEYS:
            if key in raw:
                out[key] = int(raw[key])
        for key in _STR_KEYS:
            if key in raw:
                out[key] = raw[key]
        if "deltas" in raw:
            out["deltas"] = [float(v) for v in raw["deltas"].split(",")]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if "dithering" in raw:
        flag = raw["dithering"].lower()
        if flag not in ("on", "off", "true", "false", "1", "0", "yes", "no"):
            raise ConfigError(f"dithering must be on/off, got {raw['dithering']!r}")
        out["dithering"] = flag in ("on", "true", "1", "yes")
    if "m_grid" in raw:
        out["m_grid"] = _parse_grid(raw["m_grid"])
    return out


def _parse_grid(value: str) -> list[int]:
    match = _GEOMETRIC.match(value.replace(" ", ""))
    if match:
        lo, hi, points = (int(g) for g in match.groups())
        if not (1 <= lo <= hi and points >= 1):
            raise ConfigError(f"bad geometric grid {value!r}")
        return geometric_grid(lo, hi, points)
    try:
        return [int(v) for v in value.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad m_grid {value!r}") from exc
