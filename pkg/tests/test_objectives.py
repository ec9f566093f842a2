import numpy as np
import pytest

from lipflow.objectives import (NotAFamilyMemberError, builtin_objective,
                                check_membership, combine, is_family_member,
                                optimal_k_two_delta, two_delta_optimum)

MEMBERS = ["linear", "logistic", "cosh_like", "exponential",
           "logistic_plus_linear"]


def test_builtin_point_values():
    lin = builtin_objective("linear")
    assert lin.phi(2.0) == 2.0
    assert lin.dphi(2.0) == 1.0
    assert lin.d2phi(2.0) == 0.0

    lg = builtin_objective("logistic")
    assert lg.phi(0.0) == pytest.approx(np.log(2), abs=1e-12)

    ch = builtin_objective("cosh_like")
    assert ch.phi(0.0) == 1.0
    assert ch.dphi(0.0) == 1.0


def test_unknown_objective():
    with pytest.raises(ValueError, match="linear"):
        builtin_objective("nope")


@pytest.mark.parametrize("name", MEMBERS)
def test_members_pass(name):
    rep = check_membership(builtin_objective(name))
    assert rep.is_member
    assert rep.violations == []
    assert rep.anchor_a == pytest.approx(0.0, abs=1e-9)


def test_hinge_not_member():
    rep = check_membership(builtin_objective("hinge"))
    assert not rep.is_member
    conds = {c for c, _, _ in rep.violations}
    assert "phi' > 0" in conds
    # a witness probe left of the kink where phi' vanishes
    assert any(c == "phi' > 0" and x < -1.0 for c, x, _ in rep.violations)


@pytest.mark.parametrize("name", MEMBERS + ["hinge"])
def test_derivatives_match_finite_differences(name):
    obj = builtin_objective(name)
    h = 1e-5
    # probe away from the hinge kinks at -1 and 1
    xs = np.array([-3.3, -0.4, 0.2, 1.7, 4.1])
    for f, df in [(obj.phi, obj.dphi), (obj.varphi, obj.dvarphi)]:
        fd = (f(xs + h) - f(xs - h)) / (2 * h)
        an = df(xs)
        denom = np.maximum(np.abs(an), 1e-8)
        assert np.all(np.abs(fd - an) / denom <= 1e-6)


def test_combine_table2_row():
    mix = combine([(builtin_objective("logistic"), 1.0),
                   (builtin_objective("linear"), 0.01)])
    assert is_family_member(mix)
    direct = builtin_objective("logistic_plus_linear", eps=0.01)
    xs = np.linspace(-5, 5, 11)
    assert np.allclose(mix.phi(xs), direct.phi(xs))
    assert np.allclose(mix.dvarphi(xs), direct.dvarphi(xs))


def test_combine_zero_weight_is_identity():
    lin = builtin_objective("linear")
    out = combine([(lin, 1.0), (builtin_objective("exponential"), 0.0)])
    assert out is lin


def test_combine_random_pairs_are_members():
    rng = np.random.Generator(np.random.Philox(key=11))
    names = ["linear", "logistic", "cosh_like", "exponential"]
    for _ in range(5):
        a, b = rng.choice(len(names), size=2)
        w1, w2 = rng.uniform(0.1, 2.0, size=2)
        mix = combine([(builtin_objective(names[a]), w1),
                       (builtin_objective(names[b]), w2)])
        assert is_family_member(mix)


def test_combine_rejects_bad_weights():
    lin = builtin_objective("linear")
    with pytest.raises(ValueError):
        combine([(lin, -1.0)])
    with pytest.raises(ValueError):
        combine([(lin, 0.0)])


def test_two_delta_linear_telescopes():
    lin = builtin_objective("linear")
    alpha, val = two_delta_optimum(lin, 1.0, 1.0)
    assert alpha == 0.0
    assert val == pytest.approx(-1.0, abs=1e-12)


def test_two_delta_logistic_frozen_oracle():
    # oracle: grid search over alpha in [-10, 10], step 1e-4
    lg = builtin_objective("logistic")
    alpha, val = two_delta_optimum(lg, 1.0, 0.0)
    assert alpha == pytest.approx(0.0, abs=1e-8)
    assert val == pytest.approx(1.3862943611198906, abs=1e-10)  # 2 log 2

    alpha, val = two_delta_optimum(lg, 2.0, 1.0)
    assert val == pytest.approx(0.6265233750364456, abs=1e-4)
    assert alpha == pytest.approx(-1.0, abs=1e-4)


def test_two_delta_rejects_non_member():
    with pytest.raises(NotAFamilyMemberError):
        two_delta_optimum(builtin_objective("hinge"), 1.0, 1.0)


@pytest.mark.parametrize("name", MEMBERS)
def test_j_value_non_increasing_in_k(name):
    obj = builtin_objective(name)
    ks = np.linspace(0.0, 3.0, 16)
    vals = [two_delta_optimum(obj, 1.0, k)[1] for k in ks]
    assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("name", MEMBERS)
def test_penalized_objective_bounded_below(name):
    # tangent construction: J(k) >= phi(a)+varphi(a) - (phi'(a)*d)^2/(4*lam)
    obj = builtin_objective(name)
    d, lam = 1.5, 0.7
    a = obj.anchor_a
    bound = float(obj.phi(a) + obj.varphi(a)) - (float(obj.dphi(a)) * d) ** 2 / (4 * lam)
    for k in np.linspace(0.0, 5.0, 26):
        J = two_delta_optimum(obj, d, k)[1] + lam * k * k
        assert J >= bound - 1e-9


def test_optimal_k_linear_closed_form():
    lin = builtin_objective("linear")
    assert optimal_k_two_delta(lin, 2.0, 1.0) == pytest.approx(1.0, rel=1e-6)
    assert optimal_k_two_delta(lin, 1.0, 0.5) == pytest.approx(1.0, rel=1e-6)
    assert optimal_k_two_delta(lin, 4.0, 2.0) == pytest.approx(1.0, rel=1e-6)


def test_optimal_k_large_lambda_shrinks():
    for name in MEMBERS:
        k = optimal_k_two_delta(builtin_objective(name), 1.0, 1e6)
        assert k <= 1e-3


def test_optimal_k_logistic_frozen_oracle():
    # oracle: 2-D grid over (alpha, k), steps 1e-3 / 1e-4
    lg = builtin_objective("logistic")
    assert optimal_k_two_delta(lg, 1.0, 0.5) == pytest.approx(0.4446, abs=1e-4)
