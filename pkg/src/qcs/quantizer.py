"""Uniform scalar quantization with optional uniform dither: y = Q(Phi x + xi)."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

_SNAP = 1e-12


class Dithering(str, enum.Enum):
    UNIFORM = "uniform"
    NONE = "none"


@dataclass(frozen=True)
class QuantizerConfig:
    delta: float
    dithering: Dithering = Dithering.UNIFORM

    def __post_init__(self):
        if not (np.isfinite(self.delta) and self.delta > 0):
            raise InvalidParameterError(f"resolution must be finite and > 0, got {self.delta}")
        object.__setattr__(self, "dithering", Dithering(self.dithering))


@dataclass(frozen=True)
class Measurements:
    y: np.ndarray
    dither: np.ndarray
    config: QuantizerConfig
    operator_seed: int | None = None
    dither_seed: int | None = None

    @property
    def m(self) -> int:
        return self.y.shape[0]


def quantize(u, delta: float):
    """delta * floor(u / delta), with near-lattice values snapped first.

    A value is snapped when it lies within 1e-12 cells of a lattice point, or
    within a few ulps of the cell index when that index is large.
    """
    if not delta > 0:
        raise InvalidParameterError(f"resolution must be > 0, got {delta}")
    t = np.asarray(u, dtype=float) / delta
    r = np.round(t)
    tol = np.maximum(_SNAP, 8 * np.finfo(float).eps * np.abs(t))
    cells = np.where(np.abs(t - r) <= tol, r, np.floor(t))
    return delta * cells


def draw_dither(m: int, delta: float, rng) -> np.ndarray:
    """i.i.d. uniform dither on [0, delta)."""
    if not delta > 0:
        raise InvalidParameterError(f"resolution must be > 0, got {delta}")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    return delta * rng.random(m)


def quantized_map(phi_x, dither, delta):
    """Dithered quantizer acting on already-sensed values (batch columns allowed)."""
    phi_x = np.asarray(phi_x, dtype=float)
    if phi_x.ndim == 2:
        dither = np.asarray(dither)[:, None]
    return quantize(phi_x + dither, delta)


def sense(op, x, cfg: QuantizerConfig, seed=None) -> Measurements:
    values = x.values if hasattr(x, "values") else np.asarray(x, dtype=float)
    phi_x = op.apply(values)
    if cfg.dithering is Dithering.UNIFORM:
        dither = draw_dither(op.m, cfg.delta, seed)
    else:
        dither = np.zeros(op.m)
    return Measurements(
        y=quantized_map(phi_x, dither, cfg.delta),
        dither=dither,
        config=cfg,
        operator_seed=getattr(op, "seed", None),
        dither_seed=seed if cfg.dithering is Dithering.UNIFORM else None,
    )


def resense(op, u, meas: Measurements) -> np.ndarray:
    """A(u) with the dither realization stored in ``meas``."""
    return quantized_map(op.apply(u), meas.dither, meas.config.delta)


def dither_expectation_check(a: float, delta: float, samples: int, rng) -> float:
    """Empirical mean of Q(a + xi) over ``samples`` independent dithers."""
    if samples < 1:
        raise InvalidParameterError("need at least one sample")
    xi = draw_dither(samples, delta, rng)
    return float(np.mean(quantize(a + xi, delta)))
