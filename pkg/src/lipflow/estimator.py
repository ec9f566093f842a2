"""Estimator-style facade over the particle flow.

`LipschitzParticleFlow.fit(X)` treats the rows of X as the real cloud, seeds
fake particles from a Gaussian blob, and runs the adversarial flow; after
fitting, `transform` scores points with the trained critic. This adapts the
functional core to the fit/transform convention; the core modules remain the
primary API.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import dynamics
from .dynamics import TrainConfig
from .geometry import PointCloud
from .lipschitz import PenaltyConfig
from .objectives import builtin_objective
from .rng import Rng
from .scenarios import Scenario


class LipschitzParticleFlow(BaseEstimator, TransformerMixin):
    """Moves a particle cloud toward the rows of X along a trained critic.

    Parameters mirror the training configuration; all are plain values so
    get_params/set_params round-trip.
    """

    def __init__(self, objective="linear", penalty="maxgp", lam=10.0,
                 n_particles=None, outer_iters=100, d_steps=50, eta=0.05,
                 lr=1e-3, hidden=(64, 64), activation="relu", blend_batch=64,
                 init_scale=0.5, seed=0, stop_w1_fraction=0.0):
        self.objective = objective
        self.penalty = penalty
        self.lam = lam
        self.n_particles = n_particles
        self.outer_iters = outer_iters
        self.d_steps = d_steps
        self.eta = eta
        self.lr = lr
        self.hidden = hidden
        self.activation = activation
        self.blend_batch = blend_batch
        self.init_scale = init_scale
        self.seed = seed
        self.stop_w1_fraction = stop_w1_fraction

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        n = self.n_particles or X.shape[0]
        rng = Rng(self.seed)
        fake = PointCloud.uniform(
            rng.child(1).normal(scale=self.init_scale, size=(n, X.shape[1])))
        scenario = Scenario("estimator", "random_clouds", X.shape[1],
                            PointCloud.uniform(X), fake)
        cfg = TrainConfig(
            objective=builtin_objective(self.objective),
            penalty=PenaltyConfig(kind=self.penalty, lam=self.lam,
                                  blend_batch=self.blend_batch),
            d_steps=self.d_steps, eta=self.eta, outer_iters=self.outer_iters,
            lr=self.lr)
        widths = [X.shape[1]] + list(self.hidden) + [1]
        state = dynamics.run(scenario, cfg, rng.child(0), widths=widths,
                             activation=self.activation,
                             stop_w1_fraction=self.stop_w1_fraction)
        self.particles_ = state.particles.points
        self.net_ = state.net
        self.history_ = state.history
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        """Critic scores for the rows of X, shaped (n, 1)."""
        check_is_fitted(self, "net_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features; expected {self.n_features_in_}")
        return np.asarray(self.net_.forward(X))[:, None]

    def score(self, X, y=None):
        """Negative final W1: higher is better, as sklearn expects."""
        check_is_fitted(self, "history_")
        return -self.history_[-1].w1
