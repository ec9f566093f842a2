"""Lipschitz regularizers for the critic.

Four penalties over the blend region between fake and real clouds:
  gp    - mean squared gradient norm
  lp    - one-sided: mean of max(0, ||grad|| - 1)^2
  maxgp - mean squared gradient norm over the top-m points, tracked by a
          running list of the highest-gradient blend points
  ksq   - lambda * (empirical Lipschitz constant)^2, gradient through the
          argmax probe
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import PointCloud, blend_sample
from .net import MlpDiscriminator
from .rng import Rng

PENALTY_KINDS = ("gp", "lp", "maxgp", "ksq")
_PROBE_CHUNK = 256


@dataclass(frozen=True)
class PenaltyConfig:
    kind: str
    lam: float
    k0: float = 0.0
    smax_capacity: int = 0  # maxgp only; 0 means blend_batch // 2
    blend_batch: int = 64

    def __post_init__(self):
        if self.kind not in PENALTY_KINDS:
            raise ValueError(f"unknown penalty kind {self.kind!r}")
        if self.lam <= 0:
            raise ValueError("penalty.lambda must be positive")
        if self.k0 < 0:
            raise ValueError("penalty.k0 must be non-negative")
        if self.blend_batch < 1:
            raise ValueError("penalty.blend_batch must be positive")
        if self.smax_capacity > 2 * self.blend_batch:
            raise ValueError("smax_capacity must not exceed 2 * blend_batch")

    def capacity(self) -> int:
        return self.smax_capacity or max(1, self.blend_batch // 2)


@dataclass
class SmaxList:
    """Blend points with the currently largest gradient norms, sorted descending."""

    capacity: int
    points: np.ndarray = field(default=None)  # (k, d)
    norms: np.ndarray = field(default=None)  # cached ||grad||, refreshed per call

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("smax capacity must be positive")
        if self.points is None:
            self.points = np.zeros((0, 0))
            self.norms = np.zeros(0)

    @property
    def size(self) -> int:
        return self.points.shape[0]


def grad_penalty(net: MlpDiscriminator, blend):
    """Mean squared gradient norm over blend points, with parameter gradients."""
    blend = np.atleast_2d(np.asarray(blend, float))
    if blend.shape[0] < 1:
        raise ValueError("blend batch must be non-empty")
    coeffs = np.full(blend.shape[0], 1.0 / blend.shape[0])
    sq, dws, dbs = net.sqnorm_penalty_grads(blend, coeffs)
    return float(sq.mean()), (dws, dbs)


def lp_penalty(net: MlpDiscriminator, blend):
    """Mean of max(0, ||grad|| - 1)^2 over blend points."""
    blend = np.atleast_2d(np.asarray(blend, float))
    if blend.shape[0] < 1:
        raise ValueError("blend batch must be non-empty")
    g = net.grad_input(blend)
    norms = np.linalg.norm(g, axis=1)
    excess = np.maximum(0.0, norms - 1.0)
    # d/d(||g||^2) of max(0, ||g||-1)^2 is excess / ||g||
    with np.errstate(divide="ignore", invalid="ignore"):
        coeffs = np.where(norms > 1.0, excess / norms, 0.0) / blend.shape[0]
    _, dws, dbs = net.sqnorm_penalty_grads(blend, coeffs)
    return float((excess ** 2).mean()), (dws, dbs)


def maxgp_penalty(net: MlpDiscriminator, fresh_blend, smax: SmaxList):
    """Top-m mean squared gradient norm over (tracked + fresh) blend points.

    Gradient norms of tracked points are recomputed with the current net
    before selection. Returns (loss, parameter gradients, updated SmaxList).
    """
    fresh = np.atleast_2d(np.asarray(fresh_blend, float))
    if fresh.shape[0] < 1:
        raise ValueError("fresh blend batch must be non-empty")
    if smax.size > 0:
        batch = np.vstack([smax.points, fresh])
    else:
        batch = fresh
    g = net.grad_input(batch)
    sq = np.einsum("ij,ij->i", g, g)
    m = min(smax.capacity, batch.shape[0])
    order = np.argsort(-sq, kind="stable")[:m]  # ties: lowest index wins
    coeffs = np.zeros(batch.shape[0])
    coeffs[order] = 1.0 / m
    _, dws, dbs = net.sqnorm_penalty_grads(batch, coeffs)
    loss = float(sq[order].mean())
    new_smax = SmaxList(capacity=smax.capacity,
                        points=batch[order].copy(),
                        norms=np.sqrt(sq[order]))
    return loss, (dws, dbs), new_smax


def _probe_blend(pg: PointCloud, pr: PointCloud, probes: int, rng: Rng):
    """Blend probes drawn in fixed-size chunks so prefixes are stable.

    Probe i is identical for every probes >= i+1 given the same rng seed,
    which makes the empirical constant monotone in the probe count.
    """
    chunks = []
    n_chunks = (probes + _PROBE_CHUNK - 1) // _PROBE_CHUNK
    for j in range(n_chunks):
        chunks.append(blend_sample(pg, pr, _PROBE_CHUNK, rng.child(j)))
    return np.vstack(chunks)[:probes]


def estimate_k(net: MlpDiscriminator, pg: PointCloud, pr: PointCloud,
               probes: int, rng: Rng) -> float:
    """Empirical Lipschitz constant: max gradient norm over blend probes.

    A lower bound on the true constant over the blend region.
    """
    if probes < 1:
        raise ValueError("probes must be >= 1")
    pts = _probe_blend(pg, pr, probes, rng)
    g = net.grad_input(pts)
    return float(np.sqrt(np.einsum("ij,ij->i", g, g).max()))


def ksq_penalty(net: MlpDiscriminator, pg: PointCloud, pr: PointCloud,
                probes: int, lam: float, rng: Rng, k0: float = 0.0):
    """lam * (empirical k - k0)^2 with gradients through the argmax probe."""
    if probes < 1:
        raise ValueError("probes must be >= 1")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    pts = _probe_blend(pg, pr, probes, rng)
    g = net.grad_input(pts)
    sq = np.einsum("ij,ij->i", g, g)
    best = int(np.argmax(sq))  # ties: lowest probe index
    k = float(np.sqrt(sq[best]))
    loss = lam * (k - k0) ** 2
    coeffs = np.zeros(pts.shape[0])
    if k > 0:
        # d[lam (k-k0)^2]/d(k^2) = lam (k-k0)/k
        coeffs[best] = lam * (k - k0) / k
    _, dws, dbs = net.sqnorm_penalty_grads(pts, coeffs)
    return float(loss), (dws, dbs)
