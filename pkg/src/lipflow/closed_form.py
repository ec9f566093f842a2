"""Closed-form optimal critics over analytic densities.

Densities are restricted to diagonal Gaussian mixtures and uniform boxes so
both the pdf and its gradient are exact, which keeps the unconstrained-critic
experiments (mode-collapse gradient fields) free of estimator noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

DENSITY_FLOOR = 1e-300


class OffSupportError(ValueError):
    """Raised when a closed-form critic is evaluated where it divides by ~0."""


class BoundaryError(ValueError):
    """Raised for pdf gradients on a uniform box boundary (non-differentiable)."""


@dataclass(frozen=True)
class GaussianMixture:
    """Sum of diagonal Gaussians: weights (c,), means (c, d), stds (c, d)."""

    weights: np.ndarray
    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, float)
        m = np.atleast_2d(np.asarray(self.means, float))
        s = np.atleast_2d(np.asarray(self.stds, float))
        if s.shape != m.shape or w.shape != (m.shape[0],):
            raise ValueError("weights (c,), means (c,d), stds (c,d) required")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("component weights must be non-negative and sum to 1")
        if np.any(s <= 0):
            raise ValueError("standard deviations must be strictly positive")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", m)
        object.__setattr__(self, "stds", s)

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def _component_pdfs(self, x: np.ndarray) -> np.ndarray:
        z = (x[None, :] - self.means) / self.stds
        log_norm = -0.5 * np.sum(z * z, axis=1) - np.sum(np.log(self.stds), axis=1) \
            - 0.5 * self.dim * np.log(2.0 * np.pi)
        return np.exp(log_norm)

    def value(self, x: np.ndarray) -> float:
        return float(np.dot(self.weights, self._component_pdfs(x)))

    def grad(self, x: np.ndarray) -> np.ndarray:
        pc = self._component_pdfs(x)
        # d/dx of each component: -pdf_c * (x - mean_c) / std_c^2
        g = -(x[None, :] - self.means) / self.stds**2 * pc[:, None]
        return np.dot(self.weights, g)


@dataclass(frozen=True)
class UniformBox:
    """Constant density 1/volume inside [lower, upper], zero outside."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, float))
        hi = np.atleast_1d(np.asarray(self.upper, float))
        if lo.shape != hi.shape or np.any(lo >= hi):
            raise ValueError("box corners must be ordered: lower < upper")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    def value(self, x: np.ndarray) -> float:
        if np.all(x >= self.lower) and np.all(x <= self.upper):
            return float(1.0 / np.prod(self.upper - self.lower))
        return 0.0

    def grad(self, x: np.ndarray) -> np.ndarray:
        inside_closed = np.all(x >= self.lower) and np.all(x <= self.upper)
        on_face = np.any(x == self.lower) or np.any(x == self.upper)
        if inside_closed and on_face:
            raise BoundaryError(f"pdf not differentiable on box boundary at {x!r}")
        return np.zeros_like(x)


AnalyticDensity = GaussianMixture | UniformBox


def _check_dim(d: AnalyticDensity, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, float))
    if x.size != d.dim:
        raise ValueError(f"dimension mismatch: density {d.dim}, point {x.size}")
    return x


def density_value(d: AnalyticDensity, x) -> float:
    return d.value(_check_dim(d, x))


def density_grad(d: AnalyticDensity, x) -> np.ndarray:
    return d.grad(_check_dim(d, x))


@dataclass(frozen=True)
class ClosedFormSpec:
    """Which unconstrained-critic formula to use.

    kind 'js': log of density ratio. kind 'least_squares': label-weighted
    density average (labels alpha on fakes, beta on reals). kind 'fisher':
    density difference over the reference density mu, up to a positive
    constant that never affects gradient directions.
    """

    kind: str
    alpha: float = 0.0
    beta: float = 1.0
    mu: Optional[AnalyticDensity] = None

    def __post_init__(self):
        if self.kind not in ("js", "least_squares", "fisher"):
            raise ValueError(f"unknown closed-form kind {self.kind!r}")
        if self.kind == "least_squares" and self.alpha == self.beta:
            raise ValueError("least_squares labels alpha and beta must differ")
        if self.kind == "fisher" and self.mu is None:
            raise ValueError("fisher requires a reference density mu")


def fstar_value(spec: ClosedFormSpec, pg: AnalyticDensity, pr: AnalyticDensity,
                x) -> float:
    x = _check_dim(pg, x)
    _check_dim(pr, x)
    g, r = pg.value(x), pr.value(x)
    if spec.kind == "js":
        # js divides by pg only; a vanishing pr clamps at the floor so the
        # value stays defined (and exactly pr-independent) on pg's support
        if g < DENSITY_FLOOR:
            raise OffSupportError(f"off-support evaluation at {x!r}")
        return float(np.log(max(r, DENSITY_FLOOR)) - np.log(g))
    if spec.kind == "least_squares":
        if g + r < DENSITY_FLOOR:
            raise OffSupportError(f"off-support evaluation at {x!r}")
        return float((spec.alpha * g + spec.beta * r) / (g + r))
    m = spec.mu.value(_check_dim(spec.mu, x))
    if m < DENSITY_FLOOR:
        raise OffSupportError(f"off-support evaluation at {x!r} (mu)")
    return float((r - g) / m)


def fstar_grad(spec: ClosedFormSpec, pg: AnalyticDensity, pr: AnalyticDensity,
               x) -> np.ndarray:
    x = _check_dim(pg, x)
    _check_dim(pr, x)
    g, r = pg.value(x), pr.value(x)
    dg, dr = pg.grad(x), pr.grad(x)
    if spec.kind == "js":
        if g < DENSITY_FLOOR:
            raise OffSupportError(f"off-support evaluation at {x!r}")
        # where pr underflows its gradient is zero too, so the clamped ratio
        # term vanishes exactly
        return dr / max(r, DENSITY_FLOOR) - dg / g
    if spec.kind == "least_squares":
        s = g + r
        if s < DENSITY_FLOOR:
            raise OffSupportError(f"off-support evaluation at {x!r}")
        num = spec.alpha * g + spec.beta * r
        dnum = spec.alpha * dg + spec.beta * dr
        return (dnum * s - num * (dg + dr)) / (s * s)
    m = spec.mu.value(_check_dim(spec.mu, x))
    if m < DENSITY_FLOOR:
        raise OffSupportError(f"off-support evaluation at {x!r} (mu)")
    dm = spec.mu.grad(x)
    return ((dr - dg) * m - (r - g) * dm) / (m * m)


def grad_field(spec: ClosedFormSpec, pg: AnalyticDensity, pr: AnalyticDensity,
               grid):
    """(point, critic gradient) pairs over a grid; per-point errors recorded.

    Returns (pairs, errors) where errors is a list of (point, message).
    """
    pairs, errors = [], []
    for p in grid:
        p = np.atleast_1d(np.asarray(p, float))
        try:
            pairs.append((p, fstar_grad(spec, pg, pr, p)))
        except (OffSupportError, BoundaryError) as e:
            errors.append((p, str(e)))
    return pairs, errors
