"""Minimal-distance projectors onto the supported signal sets."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InvalidParameterError, NumericalError, ShapeError
from .signals import Compressible, Generic, LowRank, MatrixView, Sparse, reshape


def hard_threshold(z, k: int) -> np.ndarray:
    """Keep the k largest-magnitude entries; ties go to the lowest index."""
    z = np.asarray(z, dtype=float)
    n = z.shape[0]
    if not 0 <= k <= n:
        raise InvalidParameterError(f"need 0 <= k <= n, got k={k}, n={n}")
    out = np.zeros_like(z)
    if k == 0:
        return out
    # stable sort on -|z| keeps lower indices first among equal magnitudes
    keep = np.argsort(-np.abs(z), kind="stable")[:k]
    out[keep] = z[keep]
    return out


def lowrank_project(z: MatrixView, r: int) -> MatrixView:
    """Best rank-r approximation in Frobenius norm (truncated SVD)."""
    if not 1 <= r <= min(z.rows, z.cols):
        raise InvalidParameterError(f"need 1 <= r <= {min(z.rows, z.cols)}, got r={r}")
    try:
        u, s, vt = np.linalg.svd(z.data, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    data = (u[:, :r] * s[:r]) @ vt[:r]
    return MatrixView(z.rows, z.cols, data)


def l1ball_project(z, tau: float) -> np.ndarray:
    """Euclidean projection onto {u : ||u||_1 <= tau} by sorting and soft-thresholding."""
    z = np.asarray(z, dtype=float)
    if not tau > 0:
        raise InvalidParameterError(f"radius must be > 0, got {tau}")
    a = np.abs(z)
    if a.sum() <= tau:
        return z.copy()
    u = np.sort(a)[::-1]
    css = np.cumsum(u) - tau
    j = np.arange(1, u.size + 1)
    rho = np.nonzero(u * j > css)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.sign(z) * np.maximum(a - theta, 0.0)


def l2ball_project(z, radius: float = 1.0) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if not radius > 0:
        raise InvalidParameterError(f"radius must be > 0, got {radius}")
    norm = np.linalg.norm(z)
    if norm <= radius:
        return z.copy()
    return z * (radius / norm)


def _ck_threshold(a, k: int) -> float:
    """Threshold theta with ||S_theta(a)||_1 = sqrt(k) ||S_theta(a)||_2 for a >= 0.

    The ratio is nonincreasing in theta; on each segment between sorted
    magnitudes it is a quadratic condition with a closed-form root.
    """
    u = np.append(np.sort(a)[::-1], 0.0)
    csum = np.cumsum(u[:-1])
    csq = np.cumsum(u[:-1] ** 2)
    for j in range(1, u.size):
        A, B = csum[j - 1], csq[j - 1]
        lo = u[j]
        top = u[:j] - lo
        norm = np.sqrt((top**2).sum())
        if norm > 0 and top.sum() >= np.sqrt(k) * norm * (1 - 1e-15):
            if j <= k:
                return float(lo)
            disc = max(k * (j * B - A * A) / (j - k), 0.0)
            theta = (A - np.sqrt(disc)) / j
            return float(min(max(theta, lo), u[j - 1]))
    return 0.0


def compressible_project(z, k: int, tol: float = 1e-10, max_iter: int = 1000,
                         method: str = "exact") -> np.ndarray:
    """Projection onto C_k = B1(sqrt k) ∩ B2(1).

    When either single-ball projection already lies in the other ball it is
    the answer. Otherwise both constraints are active and the projection is
    S_theta(z) / ||S_theta(z)||_2 for the threshold that puts it on the l1
    sphere; ``method="exact"`` solves for that threshold directly.

    ``method="dykstra"`` runs Dykstra's alternating projections instead, l1
    step first (so the first iterate is l2ball_project(l1ball_project(z))).
    It stops once x -> y -> x moves by less than ``tol`` at every step, and
    raises ConvergenceError after ``max_iter`` cycles. Convergence is slow
    when the solution sits near a point where the l1 face touches the sphere.
    """
    if k < 1:
        raise InvalidParameterError(f"need k >= 1, got {k}")
    if method not in ("exact", "dykstra"):
        raise InvalidParameterError(f"unknown method {method!r}")
    z = np.asarray(z, dtype=float)
    tau = np.sqrt(k)
    on_l1 = l1ball_project(z, tau)
    if np.linalg.norm(on_l1) <= 1.0:
        return on_l1
    on_l2 = l2ball_project(z, 1.0)
    if np.abs(on_l2).sum() <= tau:
        return on_l2
    if method == "exact":
        a = np.abs(z)
        s = np.maximum(a - _ck_threshold(a, k), 0.0)
        x = np.sign(z) * s / np.linalg.norm(s)
    else:
        x = z.copy()
        p = np.zeros_like(z)
        q = np.zeros_like(z)
        residual = np.inf
        for _ in range(max_iter):
            y = l1ball_project(x + p, tau)
            p = x + p - y
            x_new = l2ball_project(y + q, 1.0)
            q = y + q - x_new
            residual = max(np.linalg.norm(y - x), np.linalg.norm(x_new - y))
            x = x_new
            if residual < tol:
                break
        else:
            raise ConvergenceError(f"Dykstra stopped after {max_iter} iterations", residual)
    # absorb round-off overshoot of the l1 constraint
    l1 = np.abs(x).sum()
    if l1 > tau:
        x = x * (tau / l1)
    return x


@dataclass(frozen=True)
class SparseProjector:
    k: int

    @property
    def set_tag(self):
        return Sparse(self.k)

    def __call__(self, z):
        return hard_threshold(z, self.k)


@dataclass(frozen=True)
class CompressibleProjector:
    k: int
    tol: float = 1e-10
    max_iter: int = 1000
    method: str = "exact"

    @property
    def set_tag(self):
        return Compressible(self.k)

    def __call__(self, z):
        return compressible_project(z, self.k, self.tol, self.max_iter, self.method)


@dataclass(frozen=True)
class LowRankProjector:
    """Acts on vectorized matrices: reshape, truncate the SVD, re-vectorize."""

    n1: int
    n2: int
    r: int

    @property
    def set_tag(self):
        return LowRank(self.n1, self.n2, self.r)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if z.shape != (self.n1 * self.n2,):
            raise ShapeError(f"expected a length-{self.n1 * self.n2} vector, got {z.shape}")
        out = lowrank_project(reshape(z, self.n1, self.n2), self.r)
        return out.data.reshape(-1, order="F")


@dataclass(frozen=True)
class IdentityProjector:
    @property
    def set_tag(self):
        return Generic()

    def __call__(self, z):
        return np.array(z, dtype=float)


def projector_for(tag):
    if isinstance(tag, Sparse):
        return SparseProjector(tag.k)
    if isinstance(tag, Compressible):
        return CompressibleProjector(tag.k)
    if isinstance(tag, LowRank):
        return LowRankProjector(tag.n1, tag.n2, tag.r)
    return IdentityProjector()
