"""Experiment scenario presets: paired real/fake sides at desk scale."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .closed_form import AnalyticDensity, GaussianMixture
from .geometry import PointCloud
from .rng import Rng

PRESETS = ("parallel_lines", "two_gaussians_1d", "two_delta", "random_clouds",
           "image_cloud")

Side = Union[PointCloud, AnalyticDensity]


@dataclass(frozen=True)
class Scenario:
    name: str
    preset: str
    dim: int
    real: Side
    fake: Side


def parallel_lines(count: int = 10) -> Scenario:
    """Real points on the segment x=0, fakes on x=1, both uniform on [0,1]."""
    if count < 2:
        raise ValueError("parallel_lines needs at least 2 points per line")
    ys = np.linspace(0.0, 1.0, count)
    real = PointCloud.uniform(np.column_stack([np.zeros(count), ys]))
    fake = PointCloud.uniform(np.column_stack([np.ones(count), ys]))
    return Scenario("parallel_lines", "parallel_lines", 2, real, fake)


def two_gaussians_1d(c: float = 2.0, sigma: float = 0.5) -> Scenario:
    """Two real 1-D modes at -c and +c; fakes concentrated on the left mode.

    Both sides are analytic densities (for closed-form critic experiments);
    c and sigma are artifact defaults, configurable.
    """
    real = GaussianMixture(weights=[0.5, 0.5], means=[[-c], [c]],
                           stds=[[sigma], [sigma]])
    fake = GaussianMixture(weights=[1.0], means=[[-c]], stds=[[sigma]])
    return Scenario("two_gaussians_1d", "two_gaussians_1d", 1, real, fake)


def two_delta(distance: float = 1.0, dim: int = 1) -> Scenario:
    """One fake point at the origin, one real point at distance d along axis 0."""
    if distance <= 0:
        raise ValueError("two_delta distance must be positive")
    real = PointCloud.uniform(np.array([[distance] + [0.0] * (dim - 1)]))
    fake = PointCloud.uniform(np.array([[0.0] * dim]))
    return Scenario("two_delta", "two_delta", dim, real, fake)


def random_clouds(n: int = 20, dim: int = 2, seed: int = 0,
                  separation: float = 4.0, spread: float = 0.5) -> Scenario:
    """Disjoint Gaussian blobs: fakes around the origin, reals shifted by
    `separation` along the first axis."""
    rng = Rng(seed)
    fake_pts = rng.child(0).normal(scale=spread, size=(n, dim))
    real_pts = rng.child(1).normal(scale=spread, size=(n, dim))
    real_pts[:, 0] += separation
    return Scenario(f"random_clouds(seed={seed})", "random_clouds", dim,
                    PointCloud.uniform(real_pts), PointCloud.uniform(fake_pts))


def image_cloud(real_csv: str, fake_csv: str) -> Scenario:
    """Point clouds loaded from flat-float CSV images (one image per row)."""
    from .io import read_cloud_csv

    real = read_cloud_csv(real_csv)
    fake = read_cloud_csv(fake_csv)
    if real.dim != fake.dim:
        raise ValueError("image clouds must share dimension")
    return Scenario("image_cloud", "image_cloud", real.dim, real, fake)


def build_preset(tag: str, params: Optional[dict] = None) -> Scenario:
    params = dict(params or {})
    builders = {
        "parallel_lines": parallel_lines,
        "two_gaussians_1d": two_gaussians_1d,
        "two_delta": two_delta,
        "random_clouds": random_clouds,
        "image_cloud": image_cloud,
    }
    if tag not in builders:
        raise ValueError(f"unknown scenario preset {tag!r}; choose from {PRESETS}")
    return builders[tag](**params)
