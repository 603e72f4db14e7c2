"""Random sensing ensembles behind a single forward/adjoint operator interface.

Subsampled kinds (``pdct``, ``sors``) keep only row indices and signs and apply
the orthonormal DCT through FFTs; their rows carry a sqrt(n) factor so that
``Phi / sqrt(m)`` is the RIP-normalized map for every kind.
"""
from __future__ import annotations

import numpy as np
from scipy import fft

from .errors import InvalidParameterError, ShapeError

KINDS = ("gaussian", "bernoulli", "pdct", "sors")


def dct2_orthonormal(x, axis=0):
    """Orthonormal DCT-II along ``axis``; O(n log n) for every n."""
    return fft.dct(np.asarray(x, dtype=float), type=2, norm="ortho", axis=axis)


def idct2_orthonormal(x, axis=0):
    """Inverse (= transpose) of :func:`dct2_orthonormal`."""
    return fft.idct(np.asarray(x, dtype=float), type=2, norm="ortho", axis=axis)


def dct_matrix(n: int) -> np.ndarray:
    """Dense orthonormal DCT-II matrix, rows indexed by frequency."""
    j = np.arange(n)[:, None]
    i = np.arange(n)[None, :]
    c = np.cos(np.pi * (2 * i + 1) * j / (2 * n))
    scale = np.full((n, 1), np.sqrt(2.0 / n))
    scale[0] = np.sqrt(1.0 / n)
    return scale * c


class SensingOperator:
    """Linear map Phi: R^n -> R^m, immutable once built.

    ``apply`` and ``adjoint`` accept a single vector or a 2-D array whose
    columns are vectors.
    """

    def __init__(self, kind, m, n, seed, matrix=None, rows=None, signs=None):
        self.kind = kind
        self.m = m
        self.n = n
        self.seed = seed
        self._matrix = matrix
        self._rows = rows
        self._signs = signs
        for a in (matrix, rows, signs):
            if a is not None:
                a.setflags(write=False)

    def __repr__(self):
        return f"SensingOperator(kind={self.kind!r}, m={self.m}, n={self.n}, seed={self.seed})"

    @property
    def rows(self):
        return self._rows

    @property
    def signs(self):
        return self._signs

    @property
    def descriptor(self) -> str:
        return f"{self.kind}:{self.m}x{self.n}:seed={self.seed}"

    def _check(self, a, size, what):
        a = np.asarray(a, dtype=float)
        if a.ndim not in (1, 2) or a.shape[0] != size:
            raise ShapeError(f"{what} expects leading dimension {size}, got shape {a.shape}")
        return a

    def apply(self, x):
        x = self._check(x, self.n, "apply")
        if self._matrix is not None:
            return self._matrix @ x
        if self._signs is not None:
            x = self._signs[:, None] * x if x.ndim == 2 else self._signs * x
        return np.sqrt(self.n) * dct2_orthonormal(x)[self._rows]

    def adjoint(self, y):
        y = self._check(y, self.m, "adjoint")
        if self._matrix is not None:
            return self._matrix.T @ y
        z = np.zeros((self.n,) + y.shape[1:])
        z[self._rows] = y
        out = np.sqrt(self.n) * idct2_orthonormal(z)
        if self._signs is not None:
            out = self._signs[:, None] * out if out.ndim == 2 else self._signs * out
        return out

    def to_dense(self) -> np.ndarray:
        if self._matrix is not None:
            return np.array(self._matrix)
        return self.apply(np.eye(self.n))


def new_operator(kind: str, m: int, n: int, seed: int) -> SensingOperator:
    if kind not in KINDS:
        raise InvalidParameterError(f"unknown ensemble {kind!r}; expected one of {KINDS}")
    if m < 1 or n < 1:
        raise InvalidParameterError(f"need m, n >= 1, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    if kind == "gaussian":
        return SensingOperator(kind, m, n, seed, matrix=rng.standard_normal((m, n)))
    if kind == "bernoulli":
        matrix = rng.choice(np.array([-1.0, 1.0]), size=(m, n))
        return SensingOperator(kind, m, n, seed, matrix=matrix)
    if m > n:
        raise InvalidParameterError(f"{kind} needs m <= n, got m={m}, n={n}")
    # truncating a full Fisher-Yates shuffle gives a uniform m-subset
    rows = rng.permutation(n)[:m]
    signs = rng.choice(np.array([-1.0, 1.0]), size=n) if kind == "sors" else None
    return SensingOperator(kind, m, n, seed, rows=rows, signs=signs)
