"""Critic objective pairs (phi, varphi), family membership, two-delta optima.

An objective is a pair of scalar losses applied to critic scores: phi on
generated samples, varphi on real samples. The valid family requires phi
increasing convex, varphi decreasing convex, and an anchor point a where
phi'(a) + varphi'(a) = 0. All evaluators are numpy-elementwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import expit

CURVATURE_TOL = 1e-12
DEFAULT_GRID = np.linspace(-10.0, 10.0, 20001)


class NotAFamilyMemberError(ValueError):
    pass


class NonFiniteEvaluationError(ValueError):
    def __init__(self, name, x, value):
        super().__init__(f"{name} returned non-finite value {value!r} at probe x={x!r}")
        self.probe = x


@dataclass
class ObjectiveSpec:
    """A (phi, varphi) pair with exact first and second derivatives."""

    name: str
    phi: Callable
    dphi: Callable
    d2phi: Callable
    varphi: Callable
    dvarphi: Callable
    d2varphi: Callable
    anchor_a: Optional[float] = None
    _membership: Optional["MembershipReport"] = field(default=None, repr=False)


@dataclass
class MembershipReport:
    is_member: bool
    anchor_a: Optional[float]
    violations: list  # (condition, probe x, observed value)


def _softplus(x):
    return np.logaddexp(0.0, x)


def _builtin(name: str, eps: float = 0.01) -> ObjectiveSpec:
    if name == "linear":
        return ObjectiveSpec(
            "linear",
            phi=lambda x: np.asarray(x, float) + 0.0,
            dphi=lambda x: np.ones_like(np.asarray(x, float)),
            d2phi=lambda x: np.zeros_like(np.asarray(x, float)),
            varphi=lambda x: -np.asarray(x, float),
            dvarphi=lambda x: -np.ones_like(np.asarray(x, float)),
            d2varphi=lambda x: np.zeros_like(np.asarray(x, float)),
            anchor_a=0.0,
        )
    if name == "logistic":
        return ObjectiveSpec(
            "logistic",
            phi=lambda x: _softplus(x),
            dphi=lambda x: expit(x),
            d2phi=lambda x: expit(x) * expit(-x),
            varphi=lambda x: _softplus(-x),
            dvarphi=lambda x: -expit(-x),
            d2varphi=lambda x: expit(x) * expit(-x),
            anchor_a=0.0,
        )
    if name == "cosh_like":
        r = lambda x: np.sqrt(np.asarray(x, float) ** 2 + 1.0)
        return ObjectiveSpec(
            "cosh_like",
            phi=lambda x: np.asarray(x, float) + r(x),
            dphi=lambda x: 1.0 + np.asarray(x, float) / r(x),
            d2phi=lambda x: r(x) ** -3,
            varphi=lambda x: -np.asarray(x, float) + r(x),
            dvarphi=lambda x: -1.0 + np.asarray(x, float) / r(x),
            d2varphi=lambda x: r(x) ** -3,
            anchor_a=0.0,
        )
    if name == "exponential":
        return ObjectiveSpec(
            "exponential",
            phi=lambda x: np.exp(np.asarray(x, float)),
            dphi=lambda x: np.exp(np.asarray(x, float)),
            d2phi=lambda x: np.exp(np.asarray(x, float)),
            varphi=lambda x: np.exp(-np.asarray(x, float)),
            dvarphi=lambda x: -np.exp(-np.asarray(x, float)),
            d2varphi=lambda x: np.exp(-np.asarray(x, float)),
            anchor_a=0.0,
        )
    if name == "hinge":
        # max(0, x+1) on fakes, max(0, 1-x) on reals; not a family member
        return ObjectiveSpec(
            "hinge",
            phi=lambda x: np.maximum(0.0, np.asarray(x, float) + 1.0),
            dphi=lambda x: (np.asarray(x, float) > -1.0).astype(float),
            d2phi=lambda x: np.zeros_like(np.asarray(x, float)),
            varphi=lambda x: np.maximum(0.0, 1.0 - np.asarray(x, float)),
            dvarphi=lambda x: -(np.asarray(x, float) < 1.0).astype(float),
            d2varphi=lambda x: np.zeros_like(np.asarray(x, float)),
            anchor_a=None,
        )
    if name == "logistic_plus_linear":
        e = float(eps)
        if e <= 0:
            raise ValueError("logistic_plus_linear requires a positive slope")
        return ObjectiveSpec(
            f"logistic_plus_linear({e})",
            phi=lambda x: _softplus(x) + e * np.asarray(x, float),
            dphi=lambda x: expit(x) + e,
            d2phi=lambda x: expit(x) * expit(-x),
            varphi=lambda x: _softplus(-x) - e * np.asarray(x, float),
            dvarphi=lambda x: -expit(-x) - e,
            d2varphi=lambda x: expit(x) * expit(-x),
            anchor_a=0.0,
        )
    raise ValueError(
        f"unknown objective {name!r}; expected one of linear, logistic, "
        "cosh_like, exponential, hinge, logistic_plus_linear"
    )


BUILTIN_NAMES = ("linear", "logistic", "cosh_like", "exponential", "hinge",
                 "logistic_plus_linear")


def builtin_objective(name: str, eps: float = 0.01) -> ObjectiveSpec:
    """Return a built-in objective by name; eps applies to logistic_plus_linear."""
    return _builtin(name, eps)


def _eval_checked(fn, x, label):
    v = np.asarray(fn(x), dtype=float)
    bad = ~np.isfinite(v)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise NonFiniteEvaluationError(label, float(np.asarray(x)[i]), float(v.flat[i]))
    return v


def _find_anchor(obj: ObjectiveSpec, grid: np.ndarray, s: np.ndarray) -> Optional[float]:
    """Root of phi' + varphi' (non-decreasing) on the grid, by bisection."""
    if np.all(np.abs(s) <= 1e-12):
        return 0.0  # flat case: any point qualifies
    if s[0] > 1e-12 or s[-1] < -1e-12:
        return None
    # bracket the sign change
    idx = int(np.searchsorted(s > 0, True))
    if idx == 0 or idx >= len(grid):
        # s touches zero without crossing; take the nearest-to-zero probe
        j = int(np.argmin(np.abs(s)))
        return float(grid[j]) if abs(s[j]) <= 1e-9 else None
    lo, hi = float(grid[idx - 1]), float(grid[idx])
    f = lambda x: float(obj.dphi(x) + obj.dvarphi(x))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) <= 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    return 0.5 * (lo + hi)


def check_membership(obj: ObjectiveSpec, probe_grid=None) -> MembershipReport:
    """Validate the family conditions on a probe grid and locate the anchor."""
    grid = DEFAULT_GRID if probe_grid is None else np.asarray(probe_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("probe grid must be non-empty")
    if grid[0] > -10.0 or grid[-1] < 10.0:
        raise ValueError("probe grid must span at least [-10, 10]")

    dphi = _eval_checked(obj.dphi, grid, f"{obj.name}.phi'")
    dvar = _eval_checked(obj.dvarphi, grid, f"{obj.name}.varphi'")
    d2phi = _eval_checked(obj.d2phi, grid, f"{obj.name}.phi''")
    d2var = _eval_checked(obj.d2varphi, grid, f"{obj.name}.varphi''")

    violations = []

    def collect(cond_name, mask, values):
        for i in np.flatnonzero(mask)[:5]:  # a few witnesses suffice
            violations.append((cond_name, float(grid[i]), float(values[i])))

    collect("phi' > 0", dphi <= 0, dphi)
    collect("varphi' < 0", dvar >= 0, dvar)
    collect("phi'' >= 0", d2phi < -CURVATURE_TOL, d2phi)
    collect("varphi'' >= 0", d2var < -CURVATURE_TOL, d2var)

    anchor = _find_anchor(obj, grid, dphi + dvar)
    if anchor is None:
        violations.append(("exists a: phi'(a) + varphi'(a) = 0", float("nan"),
                           float("nan")))
    return MembershipReport(is_member=not violations, anchor_a=anchor,
                            violations=violations)


def _membership(obj: ObjectiveSpec) -> MembershipReport:
    if obj._membership is None:
        obj._membership = check_membership(obj)
    return obj._membership


def is_family_member(obj: ObjectiveSpec) -> bool:
    return _membership(obj).is_member


def combine(objs) -> ObjectiveSpec:
    """Non-negative linear combination of objective pairs.

    objs: iterable of (ObjectiveSpec, weight). At least one weight must be
    strictly positive.
    """
    objs = [(o, float(w)) for o, w in objs]
    if any(w < 0 for _, w in objs):
        raise ValueError("combination weights must be non-negative")
    if not any(w > 0 for _, w in objs):
        raise ValueError("at least one combination weight must be positive")
    live = [(o, w) for o, w in objs if w > 0]
    if len(live) == 1 and live[0][1] == 1.0:
        return live[0][0]

    def mix(getter):
        fns = [(getattr(o, getter), w) for o, w in live]
        return lambda x, _fns=fns: sum(w * np.asarray(f(x), float) for f, w in _fns)

    name = "+".join(f"{w:g}*{o.name}" for o, w in live)
    out = ObjectiveSpec(
        name,
        phi=mix("phi"), dphi=mix("dphi"), d2phi=mix("d2phi"),
        varphi=mix("varphi"), dvarphi=mix("dvarphi"), d2varphi=mix("d2varphi"),
    )
    rep = check_membership(out)
    out.anchor_a = rep.anchor_a
    out._membership = rep
    return out


def _require_member(obj: ObjectiveSpec):
    rep = _membership(obj)
    if not rep.is_member:
        raise NotAFamilyMemberError(
            f"objective {obj.name!r} is not in the valid family: {rep.violations}")
    return rep


def two_delta_optimum(obj: ObjectiveSpec, distance: float, k: float):
    """Optimal critic value on a one-fake/one-real pair at fixed slope k.

    With the fake score alpha and the real score alpha + k*distance, solves
    min_alpha phi(alpha) + varphi(alpha + k*distance) by bisection on the
    (non-decreasing) derivative. Returns (alpha, objective value).
    """
    if distance <= 0:
        raise ValueError("distance must be positive")
    if k < 0:
        raise ValueError("k must be non-negative")
    rep = _require_member(obj)
    beta = k * distance

    def h(a):
        return float(obj.dphi(a) + obj.dvarphi(a + beta))

    # flat derivative (linear case): alpha reported as 0 by convention
    probes = np.linspace(-10.0, 10.0, 41)
    hv = np.array([h(a) for a in probes])
    if np.all(np.abs(hv) <= 1e-12):
        alpha = 0.0
        return alpha, float(obj.phi(alpha) + obj.varphi(alpha + beta))

    lo, hi = -1.0, 1.0
    for _ in range(200):
        if h(lo) <= 0:
            break
        lo *= 2.0
    for _ in range(200):
        if h(hi) >= 0:
            break
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if h(mid) <= 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-10:
            break
    alpha = 0.5 * (lo + hi)
    return alpha, float(obj.phi(alpha) + obj.varphi(alpha + beta))


def optimal_k_two_delta(obj: ObjectiveSpec, distance: float, lam: float) -> float:
    """Slope k >= 0 minimizing the penalized one-pair loss J(k) + lam*k^2."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    _require_member(obj)

    def J(k):
        return two_delta_optimum(obj, distance, k)[1] + lam * k * k

    # expand until the upper end is clearly past the minimum (J is convex in k)
    hi = 1.0
    for _ in range(64):
        if J(hi) > J(hi * 0.5) or hi > 1e6:
            break
        hi *= 2.0
    lo = 0.0
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = J(c), J(d)
    while b - a > 1e-8:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = J(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = J(d)
    return max(0.0, 0.5 * (a + b))
