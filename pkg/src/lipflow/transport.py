"""Exact Wasserstein-1 between point clouds: primal plans and dual potentials.

The dual LP supports two constraint sets: 'support_restricted' constrains only
(real, fake) pairs, 'full_lipschitz' constrains every pair in the joint
support. Both attain the primal cost; the restricted mode is degenerate off
the cross pairs, which is exactly what the disjoint-support experiments probe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment, linprog
from scipy.spatial.distance import cdist

from .geometry import PointCloud, check_same_dim

MARGINAL_TOL = 1e-9
SUPPORT_LIMIT = 2000

CONSTRAINT_MODES = ("support_restricted", "full_lipschitz")


class ScaleGuardError(ValueError):
    pass


@dataclass(frozen=True)
class TransportPlan:
    """Optimal coupling: plan[i, j] moves mass from real i to fake j."""

    plan: np.ndarray
    cost: float

    def check(self, pr: PointCloud, pg: PointCloud, dist: np.ndarray):
        assert np.all(self.plan >= -MARGINAL_TOL)
        assert np.allclose(self.plan.sum(axis=1), pr.weights, atol=MARGINAL_TOL)
        assert np.allclose(self.plan.sum(axis=0), pg.weights, atol=MARGINAL_TOL)
        assert abs(float((self.plan * dist).sum()) - self.cost) <= MARGINAL_TOL


@dataclass(frozen=True)
class DualPotential:
    values_pr: np.ndarray
    values_pg: np.ndarray
    objective: float
    constraint_mode: str


def distance_matrix(pr: PointCloud, pg: PointCloud) -> np.ndarray:
    check_same_dim(pr, pg)
    return cdist(pr.points, pg.points)


def w1_primal(pr: PointCloud, pg: PointCloud) -> TransportPlan:
    """Exact optimal transport plan and its cost (the W1 distance)."""
    dist = distance_matrix(pr, pg)
    n, m = dist.shape
    if n == m and pr.is_uniform() and pg.is_uniform():
        rows, cols = linear_sum_assignment(dist)
        plan = np.zeros_like(dist)
        plan[rows, cols] = 1.0 / n
        cost = float(dist[rows, cols].sum() / n)
        out = TransportPlan(plan=plan, cost=cost)
        out.check(pr, pg, dist)
        return out
    # general transportation LP on the flattened plan
    c = dist.ravel()
    a_eq = np.zeros((n + m, n * m))
    for i in range(n):
        a_eq[i, i * m:(i + 1) * m] = 1.0
    for j in range(m):
        a_eq[n + j, j::m] = 1.0
    b_eq = np.concatenate([pr.weights, pg.weights])
    res = linprog(c, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if not res.success:
        raise RuntimeError(f"transportation LP failed: {res.message}")
    plan = res.x.reshape(n, m)
    # clean tiny solver negatives and renormalize marginals exactly
    plan = np.maximum(plan, 0.0)
    cost = float((plan * dist).sum())
    out = TransportPlan(plan=plan, cost=cost)
    out.check(pr, pg, dist)
    return out


def w1_dual(pr: PointCloud, pg: PointCloud,
            mode: str = "support_restricted") -> DualPotential:
    """Solve the dual LP max E_pr[f] - E_pg[f] under the selected constraints."""
    if mode not in CONSTRAINT_MODES:
        raise ValueError(f"unknown constraint mode {mode!r}")
    check_same_dim(pr, pg)
    n, m = pr.n, pg.n
    if n + m > SUPPORT_LIMIT:
        raise ScaleGuardError(f"support size {n + m} exceeds {SUPPORT_LIMIT}")
    dist = distance_matrix(pr, pg)

    # variables: [f on pr (n), f on pg (m)]
    rows, rhs = [], []

    def pair_constraint(ia, ib, d):
        # f[ia] - f[ib] <= d
        row = np.zeros(n + m)
        row[ia], row[ib] = 1.0, -1.0
        rows.append(row)
        rhs.append(d)

    for i in range(n):
        for j in range(m):
            pair_constraint(i, n + j, dist[i, j])
    if mode == "full_lipschitz":
        for i in range(n):
            for j in range(m):
                pair_constraint(n + j, i, dist[i, j])
        dist_rr = cdist(pr.points, pr.points)
        for i in range(n):
            for j in range(n):
                if i != j:
                    pair_constraint(i, j, dist_rr[i, j])
        dist_gg = cdist(pg.points, pg.points)
        for i in range(m):
            for j in range(m):
                if i != j:
                    pair_constraint(n + i, n + j, dist_gg[i, j])

    c = np.concatenate([-pr.weights, pg.weights])
    res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs),
                  bounds=(None, None), method="highs")
    if not res.success:
        raise RuntimeError(f"dual LP failed (internal error): {res.message}")
    f = res.x
    return DualPotential(values_pr=f[:n].copy(), values_pg=f[n:].copy(),
                         objective=float(-res.fun), constraint_mode=mode)


def dual_objective(pr: PointCloud, pg: PointCloud, f_pr, f_pg) -> float:
    """E_pr[f] - E_pg[f] for given potential values on the supports."""
    return float(np.dot(pr.weights, f_pr) - np.dot(pg.weights, f_pg))


def dual_feasible(pr: PointCloud, pg: PointCloud, f_pr, f_pg, mode: str,
                  tol: float = MARGINAL_TOL) -> bool:
    """Check f(x) - f(y) <= d(x, y) over the selected constraint pairs."""
    f_pr, f_pg = np.asarray(f_pr, float), np.asarray(f_pg, float)
    dist = distance_matrix(pr, pg)
    cross = f_pr[:, None] - f_pg[None, :] - dist
    if np.any(cross > tol):
        return False
    if mode == "full_lipschitz":
        if np.any(f_pg[None, :].T - f_pr[None, :] - dist.T > tol):
            return False
        drr = cdist(pr.points, pr.points)
        if np.any(np.abs(f_pr[:, None] - f_pr[None, :]) - drr > tol):
            return False
        dgg = cdist(pg.points, pg.points)
        if np.any(np.abs(f_pg[:, None] - f_pg[None, :]) - dgg > tol):
            return False
    return True


def coupling_targets(plan: TransportPlan, pg_index: int, tol: float = 1e-12):
    """Real points receiving mass from fake point pg_index, with masses."""
    n, m = plan.plan.shape
    if not 0 <= pg_index < m:
        raise IndexError(f"fake index {pg_index} out of range for {m} points")
    col = plan.plan[:, pg_index]
    return [(int(i), float(col[i])) for i in np.flatnonzero(col > tol)]
