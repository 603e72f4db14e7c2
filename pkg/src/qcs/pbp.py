"""Projected back projection and the quantized IHT refinement."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .quantizer import Measurements, resense
from .signals import Signal


@dataclass(frozen=True)
class Reconstruction:
    estimate: Signal
    back_projection: np.ndarray
    method: str = "pbp"
    iterations: int = 1
    step: float = 1.0


def _y(y):
    return y.y if isinstance(y, Measurements) else np.asarray(y, dtype=float)


def back_project(op, y) -> np.ndarray:
    """(1/m) Phi^T y."""
    return op.adjoint(_y(y)) / op.m


def pbp_reconstruct(op, y, projector) -> Reconstruction:
    a = back_project(op, y)
    return Reconstruction(Signal(projector(a), projector.set_tag), a)


def qiht(op, meas: Measurements, projector, mu: float = 1.0, iterations: int = 1) -> Reconstruction:
    """Quantized iterative hard thresholding started from the (mu-scaled) PBP estimate.

    Re-sensing of each iterate reuses the dither stored in ``meas``.
    No convergence guarantee is claimed.
    """
    if iterations < 1 or not mu > 0:
        raise InvalidParameterError(f"need iterations >= 1 and mu > 0, got {iterations}, {mu}")
    a = mu * back_project(op, meas)
    x = projector(a)
    for _ in range(iterations - 1):
        residual = meas.y - resense(op, x, meas)
        x = projector(x + (mu / op.m) * op.adjoint(residual))
    return Reconstruction(Signal(x, projector.set_tag), a, "qiht", iterations, mu)
