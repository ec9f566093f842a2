"""Points, weighted point clouds, metrics and blend-region sampling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rng import Rng

WEIGHT_TOL = 1e-12


class DimensionMismatchError(ValueError):
    pass


def _as_point(p) -> np.ndarray:
    a = np.asarray(p, dtype=float)
    if a.ndim != 1 or a.size < 1:
        raise ValueError("point must be a 1-D vector with at least one entry")
    if not np.all(np.isfinite(a)):
        raise ValueError("point entries must be finite")
    return a


def euclidean(a, b) -> float:
    """l2 distance between two points of equal dimension."""
    a, b = _as_point(a), _as_point(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dimension mismatch: {a.size} vs {b.size}")
    return float(np.linalg.norm(a - b))


def l1_distance(a, b) -> float:
    """l1 distance; only used by the norm-counterexample probe."""
    a, b = _as_point(a), _as_point(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dimension mismatch: {a.size} vs {b.size}")
    return float(np.abs(a - b).sum())


@dataclass(frozen=True)
class PointCloud:
    """Weighted finite set of points in R^n.

    points: (n, d) array, weights: (n,) non-negative, summing to 1.
    """

    points: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("points must be a non-empty (n, d) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        if self.weights is None:
            w = np.full(pts.shape[0], 1.0 / pts.shape[0])
        else:
            w = np.asarray(self.weights, dtype=float)
        if w.shape != (pts.shape[0],):
            raise ValueError("one weight per point required")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights must sum to 1 (got {w.sum()!r})")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def is_uniform(self) -> bool:
        return bool(np.allclose(self.weights, 1.0 / self.n, atol=1e-12))

    @staticmethod
    def uniform(points) -> "PointCloud":
        return PointCloud(np.asarray(points, dtype=float))


def check_same_dim(a: PointCloud, b: PointCloud) -> int:
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return a.dim


def blend_sample(pg: PointCloud, pr: PointCloud, count: int, rng: Rng) -> np.ndarray:
    """Convex combinations t*x + (1-t)*y, x from pg, y from pr, t ~ U[0,1].

    Returns a (count, d) array. Deterministic given the rng stream.
    """
    check_same_dim(pg, pr)
    if count < 1:
        raise ValueError("count must be >= 1")
    gi = rng.choice_weighted(pg.n, pg.weights, count)
    ri = rng.choice_weighted(pr.n, pr.weights, count)
    t = rng.uniform(size=(count, 1))
    return pg.points[gi] * t + pr.points[ri] * (1.0 - t)
