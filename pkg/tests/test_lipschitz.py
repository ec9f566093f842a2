import numpy as np
import pytest

from lipflow.geometry import PointCloud
from lipflow.lipschitz import (PenaltyConfig, SmaxList, estimate_k,
                               grad_penalty, ksq_penalty, lp_penalty,
                               maxgp_penalty)
from lipflow.net import MlpDiscriminator, affine_net, init
from lipflow.rng import Rng


def piecewise_net():
    """1-D relu net f(x) = relu(x) + 2*relu(x - 0.5): slope 1 on (0, 0.5),
    slope 3 on (0.5, inf)."""
    return MlpDiscriminator(
        widths=[1, 2, 1], activation="relu",
        weights=[np.array([[1.0], [1.0]]), np.array([[1.0, 2.0]])],
        biases=[np.array([0.0, -0.5]), np.array([0.0])])


def segment_clouds():
    pg = PointCloud.uniform(np.array([[0.0]]))
    pr = PointCloud.uniform(np.array([[1.0]]))
    return pg, pr


def test_penalty_config_invariants():
    with pytest.raises(ValueError, match="penalty.lambda must be positive"):
        PenaltyConfig(kind="gp", lam=-1.0)
    with pytest.raises(ValueError, match="unknown penalty kind"):
        PenaltyConfig(kind="wc", lam=1.0)
    with pytest.raises(ValueError):
        PenaltyConfig(kind="maxgp", lam=1.0, smax_capacity=200, blend_batch=64)
    cfg = PenaltyConfig(kind="maxgp", lam=10.0, blend_batch=64)
    assert cfg.capacity() == 32


def test_grad_penalty_affine_exact():
    w = np.array([0.6, -0.8])
    net = affine_net(w)
    blend = Rng(0).normal(size=(16, 2))
    loss, _ = grad_penalty(net, blend)
    assert loss == pytest.approx(float(w @ w), abs=1e-12)
    zero = affine_net([0.0, 0.0])
    assert grad_penalty(zero, blend)[0] == 0.0
    with pytest.raises(ValueError):
        grad_penalty(net, np.zeros((0, 2)))


def test_grad_penalty_finite_differences():
    net = init([2, 6, 1], "tanh", "he", Rng(41))
    blend = Rng(42).normal(size=(8, 2))
    loss, (dws, dbs) = grad_penalty(net, blend)
    h = 1e-6
    p = net.copy()
    p.weights[0][1, 0] += h
    m = net.copy()
    m.weights[0][1, 0] -= h
    fd = (grad_penalty(p, blend)[0] - grad_penalty(m, blend)[0]) / (2 * h)
    assert dws[0][1, 0] == pytest.approx(fd, rel=1e-4, abs=1e-8)


def test_lp_penalty_affine_cases():
    blend = Rng(1).normal(size=(10, 2))
    inside = affine_net([0.3, 0.4])  # norm 0.5
    assert lp_penalty(inside, blend)[0] == 0.0
    outside = affine_net([2.0, 0.0])  # norm 2
    loss, _ = lp_penalty(outside, blend)
    assert loss == pytest.approx(1.0, abs=1e-12)


def test_lp_penalty_finite_differences():
    net = init([2, 5, 1], "swish", "he", Rng(43))
    # scale up so gradient norms exceed 1 and the penalty is active
    net.weights[-1] *= 4.0
    blend = Rng(44).normal(size=(6, 2))
    loss, (dws, dbs) = lp_penalty(net, blend)
    assert loss > 0
    h = 1e-6
    p = net.copy()
    p.weights[0][0, 0] += h
    m = net.copy()
    m.weights[0][0, 0] -= h
    fd = (lp_penalty(p, blend)[0] - lp_penalty(m, blend)[0]) / (2 * h)
    assert dws[0][0, 0] == pytest.approx(fd, rel=1e-4, abs=1e-8)


def test_maxgp_empty_smax_single_point():
    net = affine_net([1.0, 1.0])
    smax = SmaxList(capacity=1)
    pt = np.array([[0.2, 0.3]])
    loss, grads, new_smax = maxgp_penalty(net, pt, smax)
    ref_loss, ref_grads = grad_penalty(net, pt)
    assert loss == ref_loss
    for a, b in zip(grads[0] + grads[1], ref_grads[0] + ref_grads[1]):
        assert np.array_equal(a, b)
    assert new_smax.size == 1
    assert np.array_equal(new_smax.points, pt)


def test_maxgp_affine_constant_field():
    net = affine_net([2.0, 0.0])
    smax = SmaxList(capacity=3)
    loss, _, new_smax = maxgp_penalty(net, Rng(2).normal(size=(8, 2)), smax)
    assert loss == pytest.approx(4.0, abs=1e-12)
    assert new_smax.size <= new_smax.capacity


def test_maxgp_concentrates_on_steep_region():
    net = piecewise_net()
    # points split between the slope-1 and slope-3 regions
    fresh = np.array([[0.1], [0.2], [0.3], [0.7], [0.8], [0.9]])
    smax = SmaxList(capacity=3)
    loss, _, new_smax = maxgp_penalty(net, fresh, smax)
    assert loss == pytest.approx(9.0, abs=1e-12)
    assert np.all(new_smax.points[:, 0] > 0.5)
    assert np.allclose(new_smax.norms, 3.0)
    # sorted descending
    assert np.all(np.diff(new_smax.norms) <= 1e-12)


def test_maxgp_at_least_mean_penalty():
    net = init([2, 8, 1], "tanh", "he", Rng(45))
    batch = Rng(46).normal(size=(12, 2))
    mean_loss, _ = grad_penalty(net, batch)
    max_loss, _, _ = maxgp_penalty(net, batch, SmaxList(capacity=4))
    assert max_loss >= mean_loss - 1e-12


def test_maxgp_refreshes_stale_norms():
    net = piecewise_net()
    smax = SmaxList(capacity=1, points=np.array([[0.2]]),
                    norms=np.array([100.0]))  # stale, wrong cache
    fresh = np.array([[0.8]])
    loss, _, new_smax = maxgp_penalty(net, fresh, smax)
    # recomputed norms put the slope-3 point first despite the stale cache
    assert loss == pytest.approx(9.0, abs=1e-12)
    assert new_smax.points[0, 0] == 0.8


def test_estimate_k_affine_exact():
    pg, pr = segment_clouds()
    pgl = PointCloud.uniform(np.array([[0.0, 0.0]]))
    prl = PointCloud.uniform(np.array([[1.0, 1.0]]))
    net = affine_net([0.6, -0.8])
    assert estimate_k(net, pgl, prl, 7, Rng(3)) == pytest.approx(1.0,
                                                                 abs=1e-12)
    zero = affine_net([0.0])
    assert estimate_k(zero, pg, pr, 5, Rng(3)) == 0.0


def test_estimate_k_piecewise_slope():
    pg, pr = segment_clouds()
    net = piecewise_net()
    k = estimate_k(net, pg, pr, 10_000, Rng(4))
    assert k == pytest.approx(3.0, rel=0.01)


def test_estimate_k_monotone_in_probes():
    pg = PointCloud.uniform(Rng(5).normal(size=(4, 2)))
    pr = PointCloud.uniform(Rng(6).normal(size=(4, 2)) + 3.0)
    net = init([2, 8, 1], "swish", "he", Rng(47))
    ks = [estimate_k(net, pg, pr, p, Rng(7))
          for p in [10, 50, 100, 400, 1000]]
    assert all(b >= a - 1e-15 for a, b in zip(ks, ks[1:]))


def test_ksq_penalty_affine_and_grads():
    pg, pr = segment_clouds()
    pgl = PointCloud.uniform(np.array([[0.0, 0.0]]))
    prl = PointCloud.uniform(np.array([[1.0, 1.0]]))
    w = np.array([1.5, 0.5])
    net = affine_net(w)
    lam = 2.0
    loss, _ = ksq_penalty(net, pgl, prl, 32, lam, Rng(8))
    assert loss == pytest.approx(lam * float(w @ w), abs=1e-12)

    deep = init([2, 5, 1], "tanh", "he", Rng(48))
    loss, (dws, dbs) = ksq_penalty(deep, pgl, prl, 16, lam, Rng(9), k0=0.1)
    h = 1e-7
    p = deep.copy()
    p.weights[0][0, 0] += h
    m = deep.copy()
    m.weights[0][0, 0] -= h
    fd = (ksq_penalty(p, pgl, prl, 16, lam, Rng(9), k0=0.1)[0]
          - ksq_penalty(m, pgl, prl, 16, lam, Rng(9), k0=0.1)[0]) / (2 * h)
    assert dws[0][0, 0] == pytest.approx(fd, rel=1e-4, abs=1e-7)


def test_ksq_rejects_bad_args():
    pg, pr = segment_clouds()
    net = affine_net([1.0])
    with pytest.raises(ValueError):
        ksq_penalty(net, pg, pr, 0, 1.0, Rng(0))
    with pytest.raises(ValueError):
        ksq_penalty(net, pg, pr, 8, 0.0, Rng(0))
