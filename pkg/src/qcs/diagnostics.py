"""Sampled estimates of the RIP and (L-)LPD distortions and of the Gaussian mean width.

Every distortion reported here is a maximum over sampled vectors, hence a
lower bound on the supremum it estimates. Samples are drawn in fixed-size
chunks with one generator per chunk, so a run with N samples sees exactly
the first N samples of any longer run with the same seed.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .quantizer import Dithering, Measurements, QuantizerConfig, draw_dither, quantize, quantized_map
from .signals import LowRank, Sparse, reshape

log = logging.getLogger(__name__)

CHUNK = 256


@dataclass(frozen=True)
class DistortionReport:
    kind: str  # "rip", "lpd" or "llpd"
    max_distortion: float
    sample_count: int
    sampler_tag: str
    operator: str
    quantizer: QuantizerConfig | None = None
    samples: np.ndarray = field(default=None, repr=False)


def _normalize(u):
    norms = np.linalg.norm(u, axis=0)
    norms[norms == 0] = 1.0
    return u / norms


class SparseSampler:
    """Unit-norm vectors with ``s`` nonzeros on a uniformly random support."""

    def __init__(self, n, s):
        if not 1 <= s <= n:
            raise InvalidParameterError(f"need 1 <= s <= n, got s={s}, n={n}")
        self.n, self.s = n, s
        self.tag = f"sparse(n={n},s={s})"

    def __call__(self, rng, count):
        supports = np.argsort(rng.random((count, self.n)), axis=1)[:, : self.s]
        u = np.zeros((self.n, count))
        u[supports.T, np.arange(count)] = rng.standard_normal((self.s, count))
        return _normalize(u)


class LowRankSampler:
    """Unit-Frobenius vectorized n1 x n2 matrices of rank ``r``."""

    def __init__(self, n1, n2, r):
        self.n1, self.n2, self.r = n1, n2, r
        self.n = n1 * n2
        self.tag = f"lowrank({n1}x{n2},r={r})"

    def __call__(self, rng, count):
        b = rng.standard_normal((count, self.n1, self.r))
        c = rng.standard_normal((count, self.n2, self.r))
        mats = b @ c.transpose(0, 2, 1)
        # column-major vec of each matrix = row-major ravel of its transpose
        u = mats.transpose(0, 2, 1).reshape(count, self.n).T
        return _normalize(u)


class SubspaceSampler:
    """Uniform unit vectors in the span of the orthonormal columns of ``basis``."""

    def __init__(self, basis, tag="subspace"):
        self.basis = np.asarray(basis, dtype=float)
        self.n = self.basis.shape[0]
        self.tag = f"{tag}(dim={self.basis.shape[1]})"

    def __call__(self, rng, count):
        g = rng.standard_normal((self.basis.shape[1], count))
        return _normalize(self.basis @ g)


class PairSampler:
    """Independent (u, v) pairs from one or two unit-vector samplers."""

    def __init__(self, sampler_u, sampler_v=None):
        self.sampler_u = sampler_u
        self.sampler_v = sampler_v or sampler_u
        self.tag = f"pairs({sampler_u.tag},{self.sampler_v.tag})"

    def __call__(self, rng, count):
        return self.sampler_u(rng, count), self.sampler_v(rng, count)


def _chunks(seed, total):
    for c, start in enumerate(range(0, total, CHUNK)):
        yield np.random.default_rng([seed, c]), min(CHUNK, total - start)


def rip_distortion_estimate(op, sampler, samples: int, seed: int = 0) -> DistortionReport:
    """max |(1/m)||Phi u||^2 - 1| over sampled unit vectors u."""
    if samples < 1:
        raise InvalidParameterError("need at least one sample")
    out = []
    for rng, count in _chunks(seed, samples):
        # full-width chunks keep rounding identical however many samples are kept
        d = np.abs(np.sum(op.apply(sampler(rng, CHUNK)) ** 2, axis=0) / op.m - 1.0)
        out.append(d[:count])
    d = np.concatenate(out)
    return DistortionReport("rip", float(d.max()), samples, sampler.tag, op.descriptor, samples=d)


def lpd_distortion_estimate(
    op, cfg: QuantizerConfig, pair_sampler, samples: int,
    fresh_dither_per_pair: bool = False, seed: int = 0,
) -> DistortionReport:
    """max (1/m)|<A(u), Phi v> - <Phi u, Phi v>| over sampled pairs.

    With ``fresh_dither_per_pair`` false a single dither serves every pair
    (uniform LPD probe); otherwise each pair gets its own (L-LPD probe).
    """
    if samples < 1:
        raise InvalidParameterError("need at least one sample")
    dither_rng = np.random.default_rng([seed, 2**32 - 1])
    dithered = cfg.dithering is Dithering.UNIFORM
    shared = draw_dither(op.m, cfg.delta, dither_rng) if dithered else np.zeros(op.m)
    out = []
    for rng, count in _chunks(seed, samples):
        u, v = pair_sampler(rng, CHUNK)
        phi_u, phi_v = op.apply(u), op.apply(v)
        if fresh_dither_per_pair and dithered:
            a_u = quantize(phi_u + cfg.delta * rng.random((op.m, CHUNK)), cfg.delta)
        else:
            a_u = quantized_map(phi_u, shared, cfg.delta)
        out.append((np.abs(np.sum((a_u - phi_u) * phi_v, axis=0)) / op.m)[:count])
    d = np.concatenate(out)
    kind = "llpd" if fresh_dither_per_pair else "lpd"
    return DistortionReport(kind, float(d.max()), samples, pair_sampler.tag, op.descriptor, cfg, d)


def llpd_fixed_estimate(op, meas: Measurements, x, sampler, samples: int, seed: int = 0) -> DistortionReport:
    """L-LPD on the realized measurements of a fixed signal x: max over v of (1/m)|<y - Phi x, Phi v>|."""
    noise = meas.y - op.apply(np.asarray(x, dtype=float))
    out = []
    for rng, count in _chunks(seed, samples):
        out.append((np.abs(noise @ op.apply(sampler(rng, CHUNK))) / op.m)[:count])
    d = np.concatenate(out)
    return DistortionReport("llpd", float(d.max()), samples, sampler.tag, op.descriptor, meas.config, d)


@dataclass(frozen=True)
class AuditRecord:
    error: float
    bound: float
    eps_hat: float
    nu_hat: float
    kind: str

    @property
    def holds(self) -> bool:
        return self.error <= self.bound

    @property
    def margin(self) -> float:
        return self.bound - self.error


def pbp_bound_audit(signal, estimate, eps_hat: float, nu_hat: float, kind: str = "structured") -> AuditRecord:
    """Compare ||x - x_hat|| with the distortion bound for the given set family.

    ``structured`` (sparse, low-rank): 2 (eps ||x|| v 1 + nu); for ||x|| <= 1
    this is 2 (eps + nu), and the RIP term scales linearly with ||x|| beyond.
    ``convex``: sqrt(4 eps + 2 nu).
    """
    x = getattr(signal, "values", signal)
    x_hat = getattr(estimate, "values", estimate)
    error = float(np.linalg.norm(np.asarray(x) - np.asarray(x_hat)))
    if kind == "structured":
        bound = 2.0 * (eps_hat * max(1.0, float(np.linalg.norm(x))) + nu_hat)
    elif kind == "convex":
        bound = float(np.sqrt(4.0 * eps_hat + 2.0 * nu_hat))
    else:
        raise InvalidParameterError(f"unknown audit kind {kind!r}")
    record = AuditRecord(error, bound, eps_hat, nu_hat, kind)
    if not record.holds:
        # sampled eps/nu underestimate the true suprema; a miss is not a contradiction
        log.info("bound missed by %.3e (error %.4f, bound %.4f)", -record.margin, error, bound)
    return record


def audit_subspace(signal, estimate) -> np.ndarray:
    """Orthonormal basis of the subspace spanned by the set components of x and x_hat."""
    x, x_hat, tag = signal.values, np.asarray(getattr(estimate, "values", estimate)), signal.set_tag
    if isinstance(tag, Sparse):
        support = np.union1d(np.flatnonzero(x), np.flatnonzero(x_hat))
        basis = np.zeros((x.size, support.size))
        basis[support, np.arange(support.size)] = 1.0
        return basis
    if isinstance(tag, LowRank):
        parts = []
        for z in (x, x_hat):
            u, s, vt = np.linalg.svd(reshape(z, tag.n1, tag.n2).data, full_matrices=False)
            for i in range(tag.r):
                if s[i] > 0:
                    parts.append(np.outer(u[:, i], vt[i]).reshape(-1, order="F"))
        q, _ = np.linalg.qr(np.stack(parts, axis=1))
        return q
    raise InvalidParameterError(f"no subspace audit for set {tag!r}")


def structured_audit(op, meas: Measurements, signal, estimate, samples: int = 2000, seed: int = 0) -> AuditRecord:
    """Estimate eps and nu on the x / x_hat subspace, then audit the PBP error against them."""
    sampler = SubspaceSampler(audit_subspace(signal, estimate), tag="audit")
    eps_hat = rip_distortion_estimate(op, sampler, samples, seed).max_distortion
    nu_hat = llpd_fixed_estimate(op, meas, signal.values, sampler, samples, seed + 1).max_distortion
    return pbp_bound_audit(signal, estimate, eps_hat, nu_hat, "structured")


def mean_width_sparse(n: int, k: int, samples: int, rng) -> float:
    """Monte-Carlo E sup_{u in Sigma_k ∩ B^n} <g, u> = E ||top-k magnitudes of g||."""
    if not 1 <= k <= n:
        raise InvalidParameterError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    total = 0.0
    for start in range(0, samples, 4096):
        count = min(4096, samples - start)
        g = np.abs(rng.standard_normal((count, n)))
        top = -np.partition(-g, k - 1, axis=1)[:, :k] if k < n else g
        total += np.sqrt(np.sum(top**2, axis=1)).sum()
    return total / samples


__all__ = [
    "AuditRecord", "DistortionReport", "LowRankSampler", "PairSampler", "SparseSampler",
    "SubspaceSampler", "audit_subspace", "llpd_fixed_estimate",
    "lpd_distortion_estimate", "mean_width_sparse", "pbp_bound_audit",
    "rip_distortion_estimate", "structured_audit",
]
