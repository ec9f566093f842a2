import numpy as np
import pytest

from lipflow.dynamics import (FlowState, TrainConfig, d_loss, init_state,
                              particle_step, run, train_discriminator,
                              value_surface)
from lipflow.geometry import PointCloud
from lipflow.lipschitz import PenaltyConfig
from lipflow.net import affine_net, init
from lipflow.objectives import builtin_objective
from lipflow.rng import Rng
from lipflow.scenarios import parallel_lines, random_clouds, two_delta


def small_cfg(objective="logistic", kind="gp", lam=1.0, **kw):
    return TrainConfig(objective=builtin_objective(objective),
                       penalty=PenaltyConfig(kind=kind, lam=lam,
                                             blend_batch=16), **kw)


def test_train_config_invariants():
    with pytest.raises(ValueError):
        small_cfg(d_steps=-1)
    with pytest.raises(ValueError):
        small_cfg(lr=0.0)
    with pytest.raises(ValueError):
        TrainConfig(objective=builtin_objective("linear"),
                    penalty=PenaltyConfig(kind="gp", lam=1.0),
                    generator_loss="identity")


def test_d_loss_values():
    scn = parallel_lines(10)
    pr, pg = scn.real, scn.fake
    lin = builtin_objective("linear")
    const = affine_net([0.0, 0.0], b=5.0)
    assert d_loss(const, lin, pg, pr) == pytest.approx(0.0, abs=1e-12)
    # f = 1 - x0: 0 on reals' side is 1, fakes 0 -> J_D = 0 - 1 = -W1
    f = affine_net([-1.0, 0.0], b=1.0)
    assert d_loss(f, lin, pg, pr) == pytest.approx(-1.0, abs=1e-12)
    lg = builtin_objective("logistic")
    zero = affine_net([0.0, 0.0])
    assert d_loss(zero, lg, pg, pr) == pytest.approx(2 * np.log(2), abs=1e-12)


def test_theorem4_output_scaling():
    # linear objective: scaling the output layer by c scales d_loss exactly
    scn = random_clouds(n=6, seed=1)
    lin = builtin_objective("linear")
    net = init([2, 8, 1], "relu", "he", Rng(50))
    base = d_loss(net, lin, scn.fake, scn.real)
    for c in [0.5, 2.0]:
        scaled = net.copy()
        scaled.weights[-1] = scaled.weights[-1] * c
        scaled.biases[-1] = scaled.biases[-1] * c
        assert d_loss(scaled, lin, scn.fake, scn.real) == c * base


def test_zero_steps_are_identities():
    scn = parallel_lines(4)
    cfg = small_cfg(d_steps=0, eta=0.0)
    state = init_state(scn, cfg, Rng(0))
    trained = train_discriminator(state, cfg, Rng(1))
    for a, b in zip(state.net.weights, trained.net.weights):
        assert np.array_equal(a, b)
    moved = particle_step(state, cfg)
    assert np.array_equal(moved.particles.points, state.particles.points)
    assert moved.iteration == 1


def test_particle_step_translates_by_gradient():
    scn = parallel_lines(4)
    cfg = small_cfg(eta=0.1)
    state = init_state(scn, cfg, Rng(0))
    state.net = affine_net([2.0, -1.0])
    moved = particle_step(state, cfg)
    assert np.allclose(moved.particles.points,
                       state.particles.points + 0.1 * np.array([2.0, -1.0]))
    assert np.array_equal(moved.particles.weights, state.particles.weights)


def test_run_zero_iterations_initial_metrics_only():
    scn = parallel_lines(5)
    cfg = small_cfg(outer_iters=0)
    state = run(scn, cfg, Rng(0))
    assert len(state.history) == 1
    assert state.history[0].iteration == 0
    assert state.history[0].w1 == pytest.approx(1.0, abs=1e-12)


def test_run_deterministic_and_structure_preserved():
    scn = random_clouds(n=5, seed=2)
    cfg = small_cfg(outer_iters=3, d_steps=5)
    a = run(scn, cfg, Rng(123))
    b = run(scn, cfg, Rng(123))
    assert [r.as_tuple() for r in a.history] == [r.as_tuple() for r in b.history]
    assert a.particles.n == scn.fake.n
    assert a.particles.dim == scn.fake.dim
    its = [r.iteration for r in a.history]
    assert its == sorted(its)


def test_inner_loss_mostly_non_increasing():
    # weak penalty so the trace isolates the d_loss descent direction
    scn = parallel_lines(8)
    cfg = small_cfg(objective="logistic", kind="gp", lam=0.005, d_steps=1,
                    outer_iters=0)
    state = init_state(scn, cfg, Rng(3))
    losses = [d_loss(state.net, cfg.objective, state.particles, state.target)]
    for step in range(60):
        state = train_discriminator(state, cfg, Rng(100 + step))
        losses.append(d_loss(state.net, cfg.objective, state.particles,
                             state.target))
    drops = sum(b <= a + 1e-9 for a, b in zip(losses, losses[1:]))
    assert drops / (len(losses) - 1) >= 0.95


def test_two_delta_ksq_converges_to_optimal_k():
    scn = two_delta(distance=2.0, dim=1)
    cfg = TrainConfig(objective=builtin_objective("linear"),
                      penalty=PenaltyConfig(kind="ksq", lam=1.0,
                                            blend_batch=64),
                      d_steps=50, eta=0.0, outer_iters=8, lr=5e-3,
                      k_probes=512)
    state = run(scn, cfg, Rng(11), widths=[1, 32, 1], activation="tanh")
    k_final = state.history[-1].k_emp
    assert k_final == pytest.approx(1.0, rel=0.05)  # d/(2*lam) = 1


def test_value_surface_affine_exact():
    net = affine_net([2.0, -3.0], b=1.0)
    xs, ys, m = value_surface(net, (0.0, 1.0), (0.0, 1.0), 5, 4)
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            assert m[i, j] == pytest.approx(2 * x - 3 * y + 1, abs=1e-12)
    zero = affine_net([0.0, 0.0])
    assert np.all(value_surface(zero, (0, 1), (0, 1), 3, 3)[2] == 0.0)


def test_value_surface_requires_2d():
    with pytest.raises(ValueError):
        value_surface(affine_net([1.0]), (0, 1), (0, 1), 3, 3)


def test_init_state_rejects_analytic_scenarios():
    from lipflow.scenarios import two_gaussians_1d
    with pytest.raises(TypeError):
        init_state(two_gaussians_1d(), small_cfg(), Rng(0))
