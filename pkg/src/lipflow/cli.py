"""Command-line entry point.

Subcommands: `ot` (exact W1 between two cloud files), `family` (objective
membership report), `flow` (particle-flow run with CSV/SVG artifacts),
`verify` (theorem suite), `surface` (critic value surfaces over a
hyperparameter grid). Multiple config files run in parallel.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import dynamics, io as iomod, lipschitz, net as netmod, svg, transport
from .closed_form import ClosedFormSpec, GaussianMixture, grad_field
from .config import ConfigError, RunManifest, parse_config_file
from .dynamics import FlowState, TrainConfig
from .geometry import PointCloud
from .net import affine_net, save_checkpoint
from .objectives import builtin_objective, check_membership
from .rng import Rng
from .verify import (TheoremReport, check_bounding,
                     check_interpolation_gradient, check_nash_convergence,
                     l1_counterexample)

EQUALITY_TOL = 1e-6


def _say(args, *parts):
    if not args.quiet:
        print(*parts)


def _outdir(args, manifest: RunManifest = None, sub: str = "") -> str:
    base = args.out_dir or (manifest.out_dir if manifest else ".")
    path = os.path.join(base, sub) if sub else base
    os.makedirs(path, exist_ok=True)
    return path


# ---- ot -------------------------------------------------------------------


def cmd_ot(args) -> int:
    real = iomod.read_cloud_csv(args.real_csv)
    fake = iomod.read_cloud_csv(args.fake_csv)
    plan = transport.w1_primal(real, fake)
    duals = {m: transport.w1_dual(real, fake, mode=m)
             for m in transport.CONSTRAINT_MODES}

    out = _outdir(args)
    seed = args.seed or 0
    iomod.write_matrix_csv(os.path.join(out, "plan.csv"), plan.plan, seed=seed)
    for mode, dual in duals.items():
        rows = [list(dual.values_pr) + list(dual.values_pg)]
        iomod.write_matrix_csv(os.path.join(out, f"dual_{mode}.csv"),
                               rows, seed=seed)

    print(f"w1 = {plan.cost!r}")
    ok = True
    for mode, dual in duals.items():
        gap = abs(dual.objective - plan.cost)
        agree = gap <= EQUALITY_TOL
        ok = ok and agree
        print(f"dual[{mode}] = {dual.objective!r}  |gap| = {gap:.3g}  "
              f"{'ok' if agree else 'MISMATCH'}")
    return 0 if ok else 1


# ---- family ---------------------------------------------------------------


def cmd_family(args) -> int:
    obj = builtin_objective(args.name, eps=args.eps)
    rep = check_membership(obj)
    print(f"objective: {obj.name}")
    print(f"member: {rep.is_member}")
    if rep.anchor_a is not None:
        print(f"anchor a: {rep.anchor_a!r}")
    for cond, x, v in rep.violations:
        print(f"violated: {cond} at x={x!r} (observed {v!r})")
    return 0 if rep.is_member else 1


# ---- flow -----------------------------------------------------------------


def _write_trajectory(path, snapshots, seed, manifest_hash):
    with open(path, "w") as fh:
        fh.write(iomod.header_lines(seed, manifest_hash))
        fh.write("iteration,particle,coords...\n")
        for it, pts in snapshots:
            for i, p in enumerate(pts):
                coords = ",".join(repr(float(v)) for v in p)
                fh.write(f"{it},{i},{coords}\n")


def _closed_form_flow(manifest: RunManifest, out: str, args) -> None:
    """Analytic-density scenarios skip training: emit closed-form gradient
    fields for each unconstrained-critic formula instead."""
    pg, pr = manifest.scenario.fake, manifest.scenario.real
    lo = min(float(np.min(d.means - 4 * d.stds)) for d in (pg, pr)
             if isinstance(d, GaussianMixture))
    hi = max(float(np.max(d.means + 4 * d.stds)) for d in (pg, pr)
             if isinstance(d, GaussianMixture))
    grid = [np.full(manifest.scenario.dim, v)
            for v in np.linspace(lo, hi, 201)]
    specs = {
        "js": ClosedFormSpec("js"),
        "least_squares": ClosedFormSpec("least_squares", alpha=0.0, beta=1.0),
        "fisher": ClosedFormSpec("fisher", mu=pr),
    }
    for tag, spec in specs.items():
        pairs, errors = grad_field(spec, pg, pr, grid)
        iomod.write_field_csv(os.path.join(out, f"field_{tag}.csv"), pairs,
                              seed=manifest.seed,
                              manifest_hash=manifest.manifest_hash)
        _say(args, f"field_{tag}.csv: {len(pairs)} points, "
             f"{len(errors)} off-support")


def _run_flow(manifest: RunManifest, out: str, args) -> FlowState:
    seed = args.seed if args.seed is not None else manifest.seed
    rng = Rng(seed)
    cfg = manifest.train
    state = dynamics.init_state(manifest.scenario, cfg, rng,
                                widths=manifest.widths,
                                activation=manifest.activation)
    snapshots = [(0, state.particles.points.copy())]
    every = manifest.snapshot_every
    w1_start = state.history[0].w1
    stop = manifest.stop_w1_fraction
    for it in range(cfg.outer_iters):
        state = dynamics.train_discriminator(state, cfg, rng.child(10_000 + it))
        state = dynamics.particle_step(state, cfg)
        last = every and state.iteration % every == 0
        if last or it == cfg.outer_iters - 1:
            snapshots.append((state.iteration, state.particles.points.copy()))
            if last and state.particles.dim == 2:
                arrows = cfg.eta * state.net.grad_input(state.particles.points)
                doc = svg.quiver_svg(state.particles.points, arrows,
                                     state.target.points,
                                     title=f"iteration {state.iteration}")
                with open(os.path.join(out, f"quiver_{state.iteration:05d}.svg"),
                          "w") as fh:
                    fh.write(doc)
        if stop > 0 and state.history[-1].w1 <= stop * w1_start:
            break

    iomod.write_metrics_csv(os.path.join(out, "metrics.csv"), state.history,
                            seed=seed, manifest_hash=manifest.manifest_hash)
    _write_trajectory(os.path.join(out, "trajectory.csv"), snapshots, seed,
                      manifest.manifest_hash)
    save_checkpoint(state.net, os.path.join(out, "critic.ckpt"))
    last = state.history[-1]
    _say(args, f"{manifest.scenario.name}: iterations={last.iteration} "
         f"w1={last.w1:.6f} (started {w1_start:.6f}) k_emp={last.k_emp:.4f}")
    return state


def cmd_flow(args) -> int:
    manifests = [parse_config_file(c) for c in args.config]
    jobs = []
    for cfg_path, manifest in zip(args.config, manifests):
        sub = (os.path.splitext(os.path.basename(cfg_path))[0]
               if len(manifests) > 1 else "")
        out = _outdir(args, manifest, sub)
        jobs.append((manifest, out))
    with ThreadPoolExecutor(max_workers=min(4, len(jobs))) as pool:
        futures = []
        for manifest, out in jobs:
            if isinstance(manifest.scenario.fake, PointCloud):
                futures.append(pool.submit(_run_flow, manifest, out, args))
            else:
                futures.append(pool.submit(_closed_form_flow, manifest, out,
                                           args))
        for f in futures:
            f.result()
    return 0


# ---- verify ---------------------------------------------------------------


def _verify_suite(manifest: RunManifest, out: str, args) -> list:
    seed = args.seed if args.seed is not None else manifest.seed
    reports = []

    rep = check_membership(manifest.objective)
    reports.append(TheoremReport(
        theorem_id="family_membership", passed=rep.is_member,
        tolerances={}, diagnostics={"objective": manifest.objective.name,
                                    "anchor": rep.anchor_a},
        witnesses=[] if rep.is_member else
        [{"condition": c, "x": x, "value": v} for c, x, v in rep.violations]))

    reports.append(l1_counterexample(seed=seed))

    state = _run_flow(manifest, out, args)
    pg, pr = state.particles, state.target
    k_emp = state.history[-1].k_emp

    _, bounding = check_bounding(state.net, pg, pr, max(k_emp, 1e-9))
    reports.append(bounding)

    plan = transport.w1_primal(pr, pg)
    targets = transport.coupling_targets(plan, 0)
    if targets:
        y = pr.points[targets[0][0]]
        reports.append(check_interpolation_gradient(
            state.net, pg.points[0], y, max(k_emp, 1e-9)))

    w1_start = state.history[0].w1
    reports.append(check_nash_convergence(
        state, tol_w=args.tol_w * w1_start, tol_k=args.tol_k))

    # negative control: a constant critic must fail the bounding check
    constant = affine_net(np.zeros(pg.dim), b=0.0)
    _, control = check_bounding(constant, pg, pr, k=1.0)
    reports.append(TheoremReport(
        theorem_id="bounding_negative_control",
        passed=not control.passed,
        tolerances=control.tolerances,
        diagnostics={"expected": "fail", **control.diagnostics},
        witnesses=[] if not control.passed else [{"kind": "control_passed"}]))

    iomod.write_reports(os.path.join(out, "verify_report.csv"), reports,
                        seed=seed, manifest_hash=manifest.manifest_hash)
    return reports


def cmd_verify(args) -> int:
    manifests = [parse_config_file(c) for c in args.config]
    code = 0
    for cfg_path, manifest in zip(args.config, manifests):
        sub = (os.path.splitext(os.path.basename(cfg_path))[0]
               if len(manifests) > 1 else "")
        out = _outdir(args, manifest, sub)
        reports = _verify_suite(manifest, out, args)
        for r in reports:
            _say(args, f"  {r.theorem_id}: {'pass' if r.passed else 'FAIL'}")
            if not r.passed:
                code = 1
        _say(args, f"report: {os.path.join(out, 'verify_report.csv')}")
    return code


# ---- surface --------------------------------------------------------------


def cmd_surface(args) -> int:
    manifest = parse_config_file(args.config)
    if manifest.scenario.dim != 2:
        print("error: surface requires a 2-D scenario", file=sys.stderr)
        return 2
    out = _outdir(args, manifest)
    seed = args.seed if args.seed is not None else manifest.seed

    surf = manifest.surface or {}
    pts = np.vstack([manifest.scenario.real.points,
                     manifest.scenario.fake.points])
    lo, hi = pts.min(axis=0) - 0.5, pts.max(axis=0) + 0.5
    x_range = (surf.get("x_min", lo[0]), surf.get("x_max", hi[0]))
    y_range = (surf.get("y_min", lo[1]), surf.get("y_max", hi[1]))
    nx, ny = surf.get("nx", 32), surf.get("ny", 32)
    activations = surf.get("activations", [manifest.activation])
    lrs = surf.get("lrs", [manifest.train.lr])
    depths = surf.get("depths", [max(1, len(manifest.widths) - 2)])

    cfg0 = manifest.train
    for act in activations:
        for lr in lrs:
            for depth in depths:
                widths = [2] + [64] * depth + [1]
                cfg = TrainConfig(
                    objective=cfg0.objective, penalty=cfg0.penalty,
                    d_steps=cfg0.d_steps, eta=cfg0.eta,
                    outer_iters=cfg0.outer_iters, lr=lr, beta1=cfg0.beta1,
                    beta2=cfg0.beta2, k_probes=cfg0.k_probes)
                rng = Rng(seed)
                state = dynamics.init_state(manifest.scenario, cfg, rng,
                                            widths=widths, activation=act)
                state = dynamics.train_discriminator(state, cfg,
                                                     rng.child(10_000))
                _, _, matrix = dynamics.value_surface(state.net, x_range,
                                                      y_range, nx, ny)
                tag = f"surface_{act}_lr{lr:g}_d{depth}"
                iomod.write_matrix_csv(os.path.join(out, f"{tag}.csv"), matrix,
                                       seed=seed,
                                       manifest_hash=manifest.manifest_hash)
                with open(os.path.join(out, f"{tag}.svg"), "w") as fh:
                    fh.write(svg.heatmap_svg(matrix, title=tag))
                _say(args, f"{tag}: value range "
                     f"[{matrix.min():.4f}, {matrix.max():.4f}]")
    return 0


# ---- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lipflow",
                                description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=None,
                   help="override the manifest seed")
    p.add_argument("--out-dir", default=None,
                   help="override the manifest output directory")
    p.add_argument("--quiet", action="store_true",
                   help="suppress progress output")
    sub = p.add_subparsers(dest="command", required=True)

    ot = sub.add_parser("ot", help="exact W1 between two point-cloud files")
    ot.add_argument("real_csv")
    ot.add_argument("fake_csv")
    ot.set_defaults(fn=cmd_ot)

    fam = sub.add_parser("family", help="objective family membership report")
    fam.add_argument("name")
    fam.add_argument("eps", nargs="?", type=float, default=0.01)
    fam.set_defaults(fn=cmd_family)

    flow = sub.add_parser("flow", help="run the particle flow from configs")
    flow.add_argument("config", nargs="+")
    flow.set_defaults(fn=cmd_flow)

    ver = sub.add_parser("verify", help="run the theorem suite from configs")
    ver.add_argument("config", nargs="+")
    ver.add_argument("--tol-w", type=float, default=0.15,
                     help="pass threshold: final W1 / initial W1")
    ver.add_argument("--tol-k", type=float, default=2.0,
                     help="pass threshold on the empirical Lipschitz constant")
    ver.set_defaults(fn=cmd_verify)

    sf = sub.add_parser("surface",
                        help="critic value surfaces over a hyperparameter grid")
    sf.add_argument("config")
    sf.set_defaults(fn=cmd_surface)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, iomod.CloudParseError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
