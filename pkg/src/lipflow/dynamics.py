"""The adversarial loop at desk scale.

The generator is an explicit set of particles moved along the critic's input
gradient; the critic is re-trained (warm-started) for a fixed number of Adam
steps between particle moves. Everything is deterministic given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import lipschitz, net as netmod, transport
from .geometry import PointCloud, blend_sample
from .lipschitz import PenaltyConfig, SmaxList
from .net import AdamState, MlpDiscriminator
from .objectives import ObjectiveSpec
from .rng import Rng
from .scenarios import Scenario


class TrainingDivergedError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    objective: ObjectiveSpec
    penalty: PenaltyConfig
    d_steps: int = 50
    eta: float = 0.05  # particle step size
    outer_iters: int = 100
    lr: float = 1e-3
    beta1: float = 0.0
    beta2: float = 0.9
    k_probes: int = 512  # probes for the empirical-k metric
    generator_loss: str = "negation"  # fixed: particles move along +grad f

    def __post_init__(self):
        if self.d_steps < 0 or self.outer_iters < 0:
            raise ValueError("step counts must be non-negative")
        if self.eta < 0 or self.lr <= 0:
            raise ValueError("rates must be positive")
        if self.generator_loss != "negation":
            raise ValueError("only the negation generator loss is supported")


@dataclass(frozen=True)
class MetricsRow:
    iteration: int
    w1: float
    mean_f_pg: float
    mean_f_pr: float
    k_emp: float
    j_d: float

    def as_tuple(self):
        return (self.iteration, self.w1, self.mean_f_pg, self.mean_f_pr,
                self.k_emp, self.j_d)


@dataclass
class FlowState:
    iteration: int
    particles: PointCloud
    target: PointCloud
    net: MlpDiscriminator
    adam: AdamState
    smax: Optional[SmaxList]
    seed: int
    history: list = field(default_factory=list)


def d_loss(net: MlpDiscriminator, obj: ObjectiveSpec, pg: PointCloud,
           pr: PointCloud) -> float:
    """Weighted critic loss: E_pg[phi(f)] + E_pr[varphi(f)]."""
    fg = net.forward(pg.points)
    fr = net.forward(pr.points)
    return float(np.dot(pg.weights, obj.phi(fg)) + np.dot(pr.weights, obj.varphi(fr)))


def d_loss_grads(net: MlpDiscriminator, obj: ObjectiveSpec, pg: PointCloud,
                 pr: PointCloud):
    fg = net.forward(pg.points)
    fr = net.forward(pr.points)
    x = np.vstack([pg.points, pr.points])
    upstream = np.concatenate([pg.weights * obj.dphi(fg),
                               pr.weights * obj.dvarphi(fr)])
    return net.grad_params(x, upstream)


def _penalty_grads(state: FlowState, cfg: TrainConfig, rng: Rng):
    """One penalty evaluation; returns (loss, grads, lam_scale, new_smax)."""
    pen = cfg.penalty
    pg, pr = state.particles, state.target
    if pen.kind == "gp":
        blend = blend_sample(pg, pr, pen.blend_batch, rng)
        loss, grads = lipschitz.grad_penalty(state.net, blend)
        return loss, grads, pen.lam, state.smax
    if pen.kind == "lp":
        blend = blend_sample(pg, pr, pen.blend_batch, rng)
        loss, grads = lipschitz.lp_penalty(state.net, blend)
        return loss, grads, pen.lam, state.smax
    if pen.kind == "maxgp":
        smax = state.smax or SmaxList(capacity=pen.capacity())
        fresh_count = max(1, pen.blend_batch - smax.capacity)
        fresh = blend_sample(pg, pr, fresh_count, rng)
        loss, grads, smax = lipschitz.maxgp_penalty(state.net, fresh, smax)
        return loss, grads, pen.lam, smax
    # ksq carries its own lambda
    loss, grads = lipschitz.ksq_penalty(state.net, pg, pr, pen.blend_batch,
                                        pen.lam, rng, k0=pen.k0)
    return loss, grads, 1.0, state.smax


def train_discriminator(state: FlowState, cfg: TrainConfig, rng: Rng) -> FlowState:
    """cfg.d_steps Adam steps on d_loss + penalty; returns the updated state."""
    net, adam, smax = state.net, state.adam, state.smax
    work = replace_state(state)
    for step in range(cfg.d_steps):
        base = d_loss(net, cfg.objective, work.particles, work.target)
        if not np.isfinite(base):
            raise TrainingDivergedError(
                f"non-finite critic loss at iteration {state.iteration}, "
                f"inner step {step}")
        grads = d_loss_grads(net, cfg.objective, work.particles, work.target)
        work.net = net
        work.smax = smax
        pen_loss, pen_grads, lam_scale, smax = _penalty_grads(
            work, cfg, rng.child(step))
        total = netmod.add_grads(grads, pen_grads, scale=lam_scale)
        net, adam = netmod.adam_step(net, total, adam, lr=cfg.lr,
                                     beta1=cfg.beta1, beta2=cfg.beta2)
    out = replace_state(state)
    out.net, out.adam, out.smax = net, adam, smax
    return out


def replace_state(state: FlowState) -> FlowState:
    return FlowState(iteration=state.iteration, particles=state.particles,
                     target=state.target, net=state.net, adam=state.adam,
                     smax=state.smax, seed=state.seed, history=state.history)


def measure(state: FlowState, cfg: TrainConfig) -> MetricsRow:
    rng = Rng(state.seed).child(1_000_000 + state.iteration)
    k_emp = lipschitz.estimate_k(state.net, state.particles, state.target,
                                 cfg.k_probes, rng)
    return MetricsRow(
        iteration=state.iteration,
        w1=transport.w1_primal(state.target, state.particles).cost,
        mean_f_pg=float(np.dot(state.particles.weights,
                               state.net.forward(state.particles.points))),
        mean_f_pr=float(np.dot(state.target.weights,
                               state.net.forward(state.target.points))),
        k_emp=k_emp,
        j_d=d_loss(state.net, cfg.objective, state.particles, state.target))


def particle_step(state: FlowState, cfg: TrainConfig) -> FlowState:
    """Move every particle by +eta * grad_input and record metrics."""
    g = state.net.grad_input(state.particles.points)
    moved = PointCloud(state.particles.points + cfg.eta * g,
                       state.particles.weights)
    out = replace_state(state)
    out.particles = moved
    out.iteration = state.iteration + 1
    out.history = state.history + [measure(out, cfg)]
    return out


def init_state(scenario: Scenario, cfg: TrainConfig, rng: Rng,
               widths=None, activation: str = "relu") -> FlowState:
    if not isinstance(scenario.fake, PointCloud):
        raise TypeError("particle flow needs point-cloud scenario sides")
    widths = widths or [scenario.dim, 64, 64, 1]
    network = netmod.init(widths, activation, "he", rng.child(0))
    smax = None
    if cfg.penalty.kind == "maxgp":
        smax = SmaxList(capacity=cfg.penalty.capacity())
    state = FlowState(iteration=0, particles=scenario.fake,
                      target=scenario.real, net=network,
                      adam=AdamState.for_net(network), smax=smax,
                      seed=rng.seed)
    state.history.append(measure(state, cfg))
    return state


def run(scenario: Scenario, cfg: TrainConfig, rng: Rng, widths=None,
        activation: str = "relu", stop_w1_fraction: float = 0.0) -> FlowState:
    """Alternate critic training and particle moves for cfg.outer_iters.

    stop_w1_fraction > 0 stops early once W1 drops below that fraction of its
    initial value.
    """
    state = init_state(scenario, cfg, rng, widths=widths, activation=activation)
    w1_start = state.history[0].w1
    for it in range(cfg.outer_iters):
        state = train_discriminator(state, cfg, rng.child(10_000 + it))
        state = particle_step(state, cfg)
        if stop_w1_fraction > 0 and state.history[-1].w1 <= stop_w1_fraction * w1_start:
            break
    return state


def value_surface(net: MlpDiscriminator, x_range, y_range, nx: int, ny: int):
    """Critic values on a 2-D lattice; returns (xs, ys, matrix[ny, nx])."""
    if net.input_dim != 2:
        raise ValueError("value surfaces require 2-D inputs")
    xs = np.linspace(x_range[0], x_range[1], nx)
    ys = np.linspace(y_range[0], y_range[1], ny)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    return xs, ys, net.forward(pts).reshape(ny, nx)
