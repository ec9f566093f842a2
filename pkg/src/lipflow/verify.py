"""Executable checks for the structural claims about optimal Lipschitz critics.

Checks run against approximately-optimal critics (LP potentials or trained
nets), so each carries an explicit tolerance. Reports serialize to json-backed
single-line records and round-trip losslessly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import l1_distance
from .net import MlpDiscriminator, affine_net
from .rng import Rng

DEFAULT_BOUNDING_TOL = 0.05
DEFAULT_GRADIENT_TOL = 0.1


@dataclass(frozen=True)
class BoundingPair:
    x_index: int
    x_side: str  # 'fake' | 'real'
    y_index: int
    y_side: str
    slack: float  # k*||x-y|| - |f(y)-f(x)|


@dataclass
class TheoremReport:
    theorem_id: str
    passed: bool
    tolerances: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)

    def __post_init__(self):
        if not self.passed and not self.witnesses:
            raise ValueError("fail reports must carry at least one witness")

    def to_json(self) -> str:
        return json.dumps({
            "theorem_id": self.theorem_id, "passed": self.passed,
            "tolerances": self.tolerances, "diagnostics": self.diagnostics,
            "witnesses": self.witnesses}, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "TheoremReport":
        d = json.loads(text)
        return TheoremReport(theorem_id=d["theorem_id"], passed=d["passed"],
                             tolerances=d["tolerances"],
                             diagnostics=d["diagnostics"],
                             witnesses=d["witnesses"])

    def to_record(self) -> str:
        detail = json.dumps(self.diagnostics, sort_keys=True)
        return f"{self.theorem_id},{str(self.passed).lower()},{detail}"


def _evaluate(f, points: np.ndarray) -> np.ndarray:
    if isinstance(f, MlpDiscriminator):
        return np.atleast_1d(f.forward(points))
    return np.array([float(f(p)) for p in points])


def check_bounding(f, pg, pr, k: float, tol: float = DEFAULT_BOUNDING_TOL):
    """Tight-pair structure of a k-Lipschitz critic on the joint support.

    For every support point, finds the partner maximizing |f(y)-f(x)|/||x-y||.
    Passes when (i) every point whose location appears on only one side has a
    tight partner, and (ii) from every fake point with a tight edge, a chain
    of tight edges reaches a real point with a higher critic value.
    Returns (pairs, report).
    """
    if k <= 0:
        raise ValueError("k must be positive")
    pts = np.vstack([pg.points, pr.points])
    sides = ["fake"] * pg.n + ["real"] * pr.n
    vals = _evaluate(f, pts)
    n = pts.shape[0]
    diff = np.abs(vals[:, None] - vals[None, :])
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    np.fill_diagonal(dist, np.inf)
    ratio = diff / dist
    tight = ratio >= (1.0 - tol) * k

    pairs = []
    best_partner = np.argmax(ratio, axis=1)
    for i in range(n):
        j = int(best_partner[i])
        pairs.append(BoundingPair(
            x_index=i, x_side=sides[i], y_index=j, y_side=sides[j],
            slack=float(k * dist[i, j] - diff[i, j])))

    # points whose location is exclusive to one side must be tightly bounded
    coincident = np.isclose(dist, 0.0)
    exclusive = [
        i for i in range(n)
        if not any(coincident[i, j] and sides[j] != sides[i] for j in range(n))
    ]
    unbounded = [i for i in exclusive if not tight[i].any()]

    # tight chains from fake points must reach a real point with larger f
    chain_failures = []
    for i in range(pg.n):
        if not tight[i].any():
            continue
        seen, frontier = {i}, [i]
        reached = False
        while frontier and not reached:
            u = frontier.pop()
            for v in np.flatnonzero(tight[u]):
                v = int(v)
                if v in seen:
                    continue
                seen.add(v)
                frontier.append(v)
                if sides[v] == "real" and vals[v] > vals[i]:
                    reached = True
                    break
        if not reached:
            chain_failures.append(i)

    passed = not unbounded and not chain_failures
    report = TheoremReport(
        theorem_id="bounding",
        passed=passed,
        tolerances={"tol": tol, "k": k},
        diagnostics={
            "support_points": n,
            "exclusive_points": len(exclusive),
            "unbounded": len(unbounded),
            "chain_failures": len(chain_failures),
        },
        witnesses=[{"kind": "unbounded", "index": int(i),
                    "best_ratio": float(ratio[i].max())} for i in unbounded[:5]]
        + [{"kind": "chain", "index": int(i)} for i in chain_failures[:5]])
    return pairs, report


def check_interpolation_gradient(net: MlpDiscriminator, x, y, k: float,
                                 steps: int = 10,
                                 tol: float = DEFAULT_GRADIENT_TOL):
    """Along the segment from x to y, gradients must have norm ~k and point
    from x towards y (the straight-line consequence of a tight pair)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if np.allclose(x, y):
        raise ValueError("x and y must differ")
    direction = (y - x) / np.linalg.norm(y - x)
    ts = np.linspace(0.0, 1.0, steps + 1)
    pts = x[None, :] + ts[:, None] * (y - x)[None, :]
    g = net.grad_input(pts)
    norms = np.linalg.norm(g, axis=1)
    with np.errstate(invalid="ignore"):
        cosines = np.where(norms > 0, g @ direction / np.where(norms > 0, norms, 1.0),
                           0.0)
    norm_ok = (norms >= k * (1.0 - tol)) & (norms <= k * (1.0 + tol))
    cos_ok = cosines >= 1.0 - tol
    passed = bool(np.all(norm_ok & cos_ok))
    witnesses = [
        {"t": float(ts[i]), "norm": float(norms[i]), "cosine": float(cosines[i])}
        for i in np.flatnonzero(~(norm_ok & cos_ok))[:5]
    ]
    return TheoremReport(
        theorem_id="interpolation_gradient",
        passed=passed,
        tolerances={"tol": tol, "k": k},
        diagnostics={"steps": steps,
                     "min_norm": float(norms.min()),
                     "max_norm": float(norms.max()),
                     "min_cosine": float(cosines.min())},
        witnesses=witnesses)


def l1_counterexample(pairs: int = 10_000, seed: int = 0) -> TheoremReport:
    """l1-Lipschitz does not constrain gradient direction: explicit witness.

    The plane g(x, y) = x + y is 1-Lipschitz under the l1 metric, attains
    g(B) - g(A) = ||A - B||_1 for A=(0,0), B=(2,1), yet its gradient (1,1) is
    not aimed at B from A.
    """
    g = affine_net([1.0, 1.0])
    rng = Rng(seed)
    a_pts = rng.normal(scale=3.0, size=(pairs, 2))
    b_pts = rng.normal(scale=3.0, size=(pairs, 2))
    fa, fb = g.forward(a_pts), g.forward(b_pts)
    l1 = np.abs(a_pts - b_pts).sum(axis=1)
    slack = l1 - np.abs(fa - fb)
    lipschitz_ok = bool(np.all(slack >= -1e-12))

    A, B = np.array([0.0, 0.0]), np.array([2.0, 1.0])
    gap = float(g.forward(B) - g.forward(A))
    equality_ok = gap == l1_distance(A, B) == 3.0
    grad_a = g.grad_input(A)
    cosine = float(grad_a @ (B - A) / (np.linalg.norm(grad_a) * np.linalg.norm(B - A)))
    expected = 3.0 / np.sqrt(10.0)
    cosine_ok = abs(cosine - expected) < 1e-12 and cosine < 1.0

    passed = lipschitz_ok and equality_ok and cosine_ok
    return TheoremReport(
        theorem_id="l1_counterexample",
        passed=passed,
        tolerances={"slack": 1e-12, "cosine": 1e-12},
        diagnostics={"pairs": pairs, "min_slack": float(slack.min()),
                     "value_gap": gap, "cosine": cosine,
                     "expected_cosine": expected},
        witnesses=[] if passed else [{"kind": "arithmetic", "cosine": cosine}])


def check_nash_convergence(final, tol_w: float, tol_k: float) -> TheoremReport:
    """Converged runs must show small W1 and small empirical Lipschitz constant.

    One-directional: the converse (small k implies convergence) is not asserted.
    """
    last = final.history[-1]
    passed = last.w1 <= tol_w and last.k_emp <= tol_k
    return TheoremReport(
        theorem_id="nash_convergence",
        passed=passed,
        tolerances={"tol_w": tol_w, "tol_k": tol_k},
        diagnostics={"iteration": last.iteration, "w1": last.w1,
                     "k_emp": last.k_emp},
        witnesses=[] if passed else [{"w1": last.w1, "k_emp": last.k_emp}])


def pointwise_stationarity(obj, pg_density, pr_density, f_value: float,
                           x) -> float:
    """Residual of the per-point optimality condition on overlapping supports:
    pg(x)*phi'(f(x)) + pr(x)*varphi'(f(x))."""
    from .closed_form import density_value

    return float(density_value(pg_density, x) * obj.dphi(f_value)
                 + density_value(pr_density, x) * obj.dvarphi(f_value))
