"""Low-complexity signal sets and the random generators used in the experiments.

Matrices are vectorized in column-major (Fortran) order throughout.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InfeasibleBudgetError, InvalidParameterError, ShapeError


@dataclass(frozen=True)
class Sparse:
    k: int


@dataclass(frozen=True)
class Compressible:
    k: int


@dataclass(frozen=True)
class LowRank:
    n1: int
    n2: int
    r: int


@dataclass(frozen=True)
class Generic:
    pass


SetTag = Union[Sparse, Compressible, LowRank, Generic]


@dataclass(frozen=True)
class Signal:
    values: np.ndarray
    set_tag: SetTag = Generic()

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class MatrixView:
    rows: int
    cols: int
    data: np.ndarray  # (rows, cols), column-major view of the vector

    def __post_init__(self):
        if self.rows * self.cols != self.data.size:
            raise ShapeError(f"{self.rows}x{self.cols} view over {self.data.size} values")


def reshape(signal, n1: int, n2: int) -> MatrixView:
    values = signal.values if isinstance(signal, Signal) else np.asarray(signal)
    if values.ndim != 1 or values.shape[0] != n1 * n2:
        raise ShapeError(f"cannot view length-{values.size} vector as {n1}x{n2}")
    return MatrixView(n1, n2, values.reshape((n1, n2), order="F"))


def vec(view: MatrixView, set_tag: SetTag = Generic()) -> Signal:
    return Signal(view.data.reshape(-1, order="F"), set_tag)


def _rng(rng) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def gen_sparse(n: int, k: int, rng) -> Signal:
    """k-sparse vector: uniform random support, i.i.d. N(0, 1) nonzeros, no normalization."""
    if not 1 <= k <= n:
        raise InvalidParameterError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = _rng(rng)
    support = rng.choice(n, size=k, replace=False)
    x = np.zeros(n)
    x[support] = rng.standard_normal(k)
    return Signal(x, Sparse(k))


def _l1_l2_ratio(alpha: float, i: np.ndarray) -> float:
    w = i ** (-alpha)
    return w.sum() / np.sqrt(np.sum(w * w))


def decay_exponent(n: int, k: int, iterations: int = 60) -> float:
    """Smallest-found alpha in (1, 2] with sum(i^-a) / ||i^-a||_2 <= sqrt(k).

    The ratio decreases with alpha, so plain bisection applies. The returned
    value always satisfies the constraint.
    """
    if not 1 <= k <= n:
        raise InvalidParameterError(f"need 1 <= k <= n, got k={k}, n={n}")
    i = np.arange(1, n + 1, dtype=float)
    target = np.sqrt(k)
    if _l1_l2_ratio(2.0, i) > target:
        raise InfeasibleBudgetError(
            f"ratio at alpha=2 is {_l1_l2_ratio(2.0, i):.6f} > sqrt({k}) for n={n}"
        )
    lo, hi = 1.0, 2.0
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if _l1_l2_ratio(mid, i) <= target:
            hi = mid
        else:
            lo = mid
    return hi


def gen_compressible(n: int, k: int, rng) -> Signal:
    """Unit-norm compressible vector in C_k built from a power-law magnitude profile."""
    alpha = decay_exponent(n, k)
    rng = _rng(rng)
    magnitudes = np.arange(1, n + 1, dtype=float) ** (-alpha)
    signs = rng.choice(np.array([-1.0, 1.0]), size=n)
    x = (signs * magnitudes)[rng.permutation(n)]
    x /= np.linalg.norm(x)
    return Signal(x, Compressible(k))


def gen_lowrank(n1: int, n2: int, r: int, rng) -> Signal:
    if not 1 <= r <= min(n1, n2):
        raise InvalidParameterError(f"need 1 <= r <= min(n1, n2), got r={r}")
    rng = _rng(rng)
    b = rng.standard_normal((n1, r))
    c = rng.standard_normal((n2, r))
    x = b @ c.T
    x /= np.linalg.norm(x, "fro")
    return vec(MatrixView(n1, n2, x), LowRank(n1, n2, r))


def satisfies(signal: Signal) -> bool:
    """Check the membership invariant attached to the signal's set tag."""
    x, tag = signal.values, signal.set_tag
    if isinstance(tag, Sparse):
        return np.count_nonzero(x) <= tag.k
    if isinstance(tag, Compressible):
        return np.abs(x).sum() <= np.sqrt(tag.k) + 1e-9 and np.linalg.norm(x) <= 1 + 1e-12
    if isinstance(tag, LowRank):
        if x.size != tag.n1 * tag.n2:
            return False
        s = np.linalg.svd(reshape(x, tag.n1, tag.n2).data, compute_uv=False)
        return s.size <= tag.r or s[0] == 0 or bool(np.all(s[tag.r:] <= 1e-10 * s[0]))
    return True
