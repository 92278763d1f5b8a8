"""Scenario-driven command line: validate, worldlines, equivariance, plots.

Exit codes: 0 pass, 1 gate failure, 2 usage or validation error.  Every
command writes a machine-readable run manifest next to its outputs, and
all CSV/SVG outputs are byte-reproducible for a fixed scenario and seed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, dirac, dynamics, equivariance, foliation
from .errors import BohmDiracError, ScenarioError
from .scenario import load_scenario
from .svgfig import SvgCanvas, wire_bounds, wireframe, write_atomic

PALETTE = ("#1f4e8c", "#b2382b", "#2d7a3a", "#7a4ba0", "#b07020", "#3a7a8c")


def _fmt(v):
    return f"{v:.12g}"


def _manifest_core(command, scenario_path, seed, threads):
    sha = hashlib.sha256(Path(scenario_path).read_bytes()).hexdigest()
    return {
        "command": command,
        "scenario": str(scenario_path),
        "scenario_sha256": sha,
        "seed": seed,
        "threads": threads,
        "versions": {
            "bohmdirac": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
        },
    }


def _manifest_hash(core):
    return hashlib.sha256(json.dumps(core, sort_keys=True).encode()).hexdigest()


def _write_manifest(out_dir, core, gates, outputs, exit_code):
    doc = dict(core)
    doc["manifest_sha256"] = _manifest_hash(core)
    doc["gates"] = gates
    doc["outputs"] = sorted(str(p) for p in outputs)
    doc["exit_code"] = exit_code
    path = Path(out_dir) / f"{core['command']}_manifest.json"
    write_atomic(path, json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return path


# ---------------------------------------------------------------------------
# validate


def cmd_validate(sc, out_dir, args, core):
    report = foliation.validate(sc.foliation)
    for line in report.lines():
        print(line)
    residual_ok = True
    resolution_ok = True
    for ti, (_, factors) in enumerate(sc.wave.terms):
        for j, fac in enumerate(factors):
            r = dirac.dirac_residual(fac, (0.31 + 0.1 * ti, -0.7 + 0.3 * j), h=1e-4)
            print(f"dirac residual term {ti} slot {j}: {r:.3e}")
            residual_ok &= r < 1e-6
            # image packets must stay outside the quadrature window
            period = fac.alias_period()
            span = sc.windows[j][1] - sc.windows[j][0]
            if period <= span:
                print(f"alias period {period:.3g} <= window span {span:.3g} "
                      f"(term {ti} slot {j}): raise n_modes or shrink k_window")
                resolution_ok = False
    ok = report.ok and residual_ok and resolution_ok
    gates = {"foliation_ok": report.ok, "dirac_residuals_ok": residual_ok,
             "mode_resolution_ok": resolution_ok}
    code = 0 if ok else 2
    _write_manifest(out_dir, core, gates, [], code)
    print("validate:", "PASS" if ok else "FAIL")
    return code


# ---------------------------------------------------------------------------
# worldlines


def _trajectory_rows(traj, index_offset=0):
    rows = []
    for i, t in enumerate(traj.ts):
        for k in range(traj.n_particles):
            rows.append(",".join([
                _fmt(t), str(k + index_offset), _fmt(traj.x0[i, k]),
                _fmt(traj.x1[i, k]), _fmt(traj.v[i, k, 0]), _fmt(traj.v[i, k, 1]),
                "1" if traj.frozen[i, k] else "0", ""]))
    for kink in traj.kinks:
        i_near = int(np.argmin(np.abs(traj.ts - kink.t_enter)))
        rows.append(",".join([
            _fmt(kink.t_enter), str(kink.particle + index_offset),
            _fmt(traj.x0[i_near, kink.particle]), _fmt(traj.x1[i_near, kink.particle]),
            "0", "0", "1",
            f"kink angle={kink.angle:.6g} t_exit={_fmt(kink.t_exit)}"]))
    return rows


def cmd_worldlines(sc, out_dir, args, core):
    if not sc.worldline_initials:
        raise ScenarioError("scenario has no [worldlines] initial positions")
    spec = sc.foliation
    opts = sc.integrator
    if args.debug_velocity_scale != 1.0:
        opts = dynamics.IntegratorOptions(**{**opts.__dict__,
                                             "velocity_scale": args.debug_velocity_scale})
    trajs = []
    for x1s in sc.worldline_initials:
        cfg = dynamics.Configuration.on_leaf(spec, sc.t0, np.array(x1s))
        traj = dynamics.integrate(sc.wave, spec, sc.t0, cfg, sc.t1, opts)
        dynamics.detect_kinks(traj, spec)
        trajs.append(traj)

    csv_lines = ["t,k,x0,x1,v0,v1,on_plateau,event"]
    for traj in trajs:
        csv_lines.extend(_trajectory_rows(traj))
    csv_path = Path(out_dir) / "worldlines.csv"
    write_atomic(csv_path, "\n".join(csv_lines) + "\n")

    xs_all = np.concatenate([traj.x1.ravel() for traj in trajs])
    x0_all = np.concatenate([traj.x0.ravel() for traj in trajs])
    x_lo, x_hi = xs_all.min() - 1.0, xs_all.max() + 1.0
    y_lo, y_hi = x0_all.min() - 0.5, x0_all.max() + 0.5
    canvas = SvgCanvas((x_lo, x_hi), (y_lo, y_hi),
                       title=f"world lines: {sc.title}")
    canvas.comment(f"manifest:sha256={_manifest_hash(core)}")
    xs = np.linspace(x_lo, x_hi, 241)
    for t in np.linspace(sc.t0, sc.t1, 17):
        canvas.polyline(xs, np.asarray(spec.f(t, xs), dtype=float),
                        stroke="#bbb", width=0.6)
    n_kinks = 0
    for i, traj in enumerate(trajs):
        for k in range(traj.n_particles):
            canvas.polyline(traj.x1[:, k], traj.x0[:, k],
                            stroke=PALETTE[(i * traj.n_particles + k) % len(PALETTE)],
                            width=2.0)
        for kink in traj.kinks:
            i_near = int(np.argmin(np.abs(traj.ts - kink.t_enter)))
            canvas.circle(traj.x1[i_near, kink.particle],
                          traj.x0[i_near, kink.particle], r=4.0, fill="#c22")
            n_kinks += 1
    canvas.axes(xlabel="x1", ylabel="x0")
    svg_path = Path(out_dir) / "worldlines.svg"
    canvas.save(svg_path)

    print(f"integrated {len(trajs)} trajectories, {n_kinks} kink(s)")
    gates = {"trajectories": len(trajs), "kinks": n_kinks}
    _write_manifest(out_dir, core, gates, [csv_path, svg_path], 0)
    return 0


# ---------------------------------------------------------------------------
# equivariance


def cmd_equivariance(sc, out_dir, args, core):
    if sc.m <= 0:
        raise ScenarioError("ensemble.m must be >= 1 for the equivariance run")
    spec = sc.foliation
    seed = args.seed if args.seed is not None else sc.seed
    opts = sc.integrator
    if args.debug_velocity_scale != 1.0:
        print(f"NEGATIVE CONTROL: velocities scaled by {args.debug_velocity_scale}")
        opts = dynamics.IntegratorOptions(**{**opts.__dict__,
                                             "velocity_scale": args.debug_velocity_scale})

    t_grid = np.linspace(sc.t0, sc.t1, 21)
    drift, _ = equivariance.total_probability_scan(sc.wave, spec, t_grid, sc.windows)

    ld0 = equivariance.LeafDensity(sc.wave, spec, sc.t0, sc.windows)
    positions = equivariance.sample_positions(ld0, sc.m, seed)

    watch = None
    snapshot_times = ()
    if spec.plateau is not None:
        (a_lo, a_hi), (p_t1, p_t2) = spec.plateau
        w_t1, w_t2 = max(p_t1, sc.t0), min(p_t2, sc.t1)
        if w_t1 < w_t2:
            watch = ((a_lo, a_hi), (w_t1, w_t2))
            snapshot_times = (w_t1, w_t2)

    res = equivariance.transport(positions, sc.wave, spec, sc.t0, sc.t1, opts,
                                 watch_region=watch, snapshot_times=snapshot_times,
                                 threads=args.threads)
    ld1 = equivariance.LeafDensity(sc.wave, spec, sc.t1, sc.windows)
    comp = equivariance.compare(res.positions[res.alive], ld1)

    report = equivariance.EnsembleReport(
        m=sc.m,
        ks_per_marginal=tuple(float(v) for v in comp.ks_per_marginal),
        total_prob_drift=drift,
        node_aborts=res.node_aborts,
        causal_violations=res.causal_violations,
        containment_violations=res.containment_violations,
        wall_time=res.wall_time,
        energy_distance=comp.energy,
        window_exits=res.window_exits,
    )

    gates = {
        "ks": {"threshold": sc.gates["ks"],
               "value": max(report.ks_per_marginal),
               "pass": bool(max(report.ks_per_marginal) < sc.gates["ks"])},
        "node_fraction": {"threshold": sc.gates["node_fraction"],
                          "value": report.node_aborts / sc.m,
                          "pass": bool(report.node_aborts / sc.m < sc.gates["node_fraction"])},
        "drift": {"threshold": sc.gates["drift"], "value": drift,
                  "pass": bool(drift < sc.gates["drift"])},
        "causal": {"threshold": sc.gates["causal"], "value": report.causal_violations,
                   "pass": bool(report.causal_violations <= sc.gates["causal"])},
        "containment": {"threshold": sc.gates["containment"],
                        "value": report.containment_violations,
                        "pass": bool(report.containment_violations <= sc.gates["containment"])},
    }
    all_pass = all(g["pass"] for g in gates.values())

    out = Path(out_dir)
    txt_path = out / "equivariance_report.txt"
    write_atomic(txt_path, report.as_text())
    csv_path = out / "equivariance_report.csv"
    write_atomic(csv_path, report.csv_header() + "\n" + report.as_csv_row() + "\n")
    outputs = [txt_path, csv_path]
    if sc.raw.get("outputs", {}).get("dump_ensemble", False):
        lines = ["t,k,x0,x1"]
        x0s = np.asarray(spec.f(sc.t1, res.positions), dtype=float)
        for i in range(sc.m):
            for k in range(res.positions.shape[1]):
                lines.append(",".join([_fmt(sc.t1), str(k), _fmt(x0s[i, k]),
                                       _fmt(res.positions[i, k])]))
        dump_path = out / "ensemble.csv"
        write_atomic(dump_path, "\n".join(lines) + "\n")
        outputs.append(dump_path)

    print(report.as_text(), end="")
    for name, g in gates.items():
        print(f"gate {name:12s}: value={g['value']:.6g} threshold={g['threshold']:.6g} "
              f"{'PASS' if g['pass'] else 'FAIL'}")
    code = 0 if all_pass else 1
    _write_manifest(out_dir, core, gates, outputs, code)
    return code


# ---------------------------------------------------------------------------
# plots


def _plot_g(out_dir, core):
    xs = np.linspace(-3.0, 3.0, 601)
    canvas = SvgCanvas((-3, 3), (-1.15, 1.15), title="saturating profile g")
    canvas.comment(f"manifest:sha256={_manifest_hash(core)}")
    canvas.polyline(xs, foliation.g_profile(xs), width=2.0)
    canvas.axes(xlabel="x", ylabel="g(x)")
    path = Path(out_dir) / "plot_g.svg"
    canvas.save(path)
    return [path]


def _plot_f(sc, out_dir, core):
    spec = sc.foliation
    t_lo = max(spec.window.t_min, -3.0)
    t_hi = min(spec.window.t_max, 3.0)
    ts = np.linspace(t_lo, t_hi, 31)
    xs = np.linspace(-3.0, 3.0, 31)
    T, X = np.meshgrid(ts, xs, indexing="ij")
    F = np.asarray(spec.f(T, X), dtype=float)
    (u_lo, u_hi), (v_lo, v_hi) = wire_bounds(T, F, X)
    canvas = SvgCanvas((u_lo, u_hi), (v_lo, v_hi),
                       title=f"leaf function of '{spec.name}' (plateau at 0 where frozen)")
    canvas.comment(f"manifest:sha256={_manifest_hash(core)}")
    wireframe(canvas, T, F, X)
    canvas.axes(xlabel="t (depth: x)", ylabel="f(t,x)")
    path = Path(out_dir) / "plot_f.svg"
    canvas.save(path)
    return [path]


def _plot_foliation(sc, out_dir, core):
    spec = sc.foliation
    t_lo = max(spec.window.t_min, -3.0)
    t_hi = min(spec.window.t_max, 3.0)
    xs = np.linspace(-4.0, 4.0, 321)
    curves = []
    for t in np.linspace(t_lo, t_hi, 25):
        curves.append((t, np.asarray(spec.f(t, xs), dtype=float)))
    y_lo = min(c.min() for _, c in curves) - 0.3
    y_hi = max(c.max() for _, c in curves) + 0.3
    canvas = SvgCanvas((-4, 4), (y_lo, y_hi), title=f"leaves of '{spec.name}'")
    canvas.comment(f"manifest:sha256={_manifest_hash(core)}")
    for _, c in curves:
        canvas.polyline(xs, c, width=1.0)
    canvas.axes(xlabel="x1", ylabel="x0")
    path = Path(out_dir) / "plot_foliation.svg"
    canvas.save(path)
    return [path]


def _plot_surface_c(sc, out_dir, core):
    spec = sc.foliation
    paths = []
    for x2 in (-2.0, 3.0):
        mesh = foliation.surface_c_mesh(spec, x2)
        T1 = mesh.x0_1
        X1 = np.broadcast_to(mesh.x1_vals, T1.shape)
        X02 = np.broadcast_to(mesh.x0_2[:, None], T1.shape)
        (u_lo, u_hi), (v_lo, v_hi) = wire_bounds(X1, T1, X02)
        canvas = SvgCanvas((u_lo, u_hi), (v_lo, v_hi),
                           title=f"configuration surface, partner at x2={x2:g}")
        canvas.comment(f"manifest:sha256={_manifest_hash(core)}")
        wireframe(canvas, X1, T1, X02, stride=1)
        canvas.axes(xlabel="x1_1 (depth: x0_2)", ylabel="x0_1")
        path = Path(out_dir) / f"plot_surface_c_x2_{x2:+.0f}.svg"
        canvas.save(path)
        # companion CSV of the mesh
        lines = ["t,x1,x0_1,x0_2"]
        lines += [",".join(map(_fmt, row)) for row in mesh.rows()]
        csv_path = Path(out_dir) / f"surface_c_x2_{x2:+.0f}.csv"
        write_atomic(csv_path, "\n".join(lines) + "\n")
        paths += [path, csv_path]
    return paths


def cmd_plots(sc, out_dir, args, core):
    which = args.which
    outputs = []
    if which in ("g", "all"):
        outputs += _plot_g(out_dir, core)
    if which in ("f", "all"):
        outputs += _plot_f(sc, out_dir, core)
    if which in ("foliation", "all"):
        outputs += _plot_foliation(sc, out_dir, core)
    if which in ("surface-c", "all"):
        outputs += _plot_surface_c(sc, out_dir, core)
    for p in outputs:
        print("wrote", p)
    _write_manifest(out_dir, core, {"which": which}, outputs, 0)
    return 0


# ---------------------------------------------------------------------------
# entry point


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bohmdirac",
        description="Bohmian trajectories on (degenerate) time foliations: "
                    "validation, world lines, equivariance runs and figures.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("validate", "check foliation geometry and wave residuals"),
        ("worldlines", "integrate configured initial conditions; CSV + SVG"),
        ("equivariance", "sample, transport, compare; gate the result"),
        ("plots", "deterministic SVG figure families"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scenario", required=True, help="scenario TOML file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override scenario seed")
        p.add_argument("--threads", type=int, default=1,
                       help="transport worker threads")
        p.add_argument("--debug-velocity-scale", type=float, default=1.0,
                       help="NEGATIVE CONTROL ONLY: mis-scale velocities")
        if name == "plots":
            p.add_argument("--which", default="all",
                           choices=["foliation", "g", "f", "surface-c", "all"])
    return parser


COMMANDS = {
    "validate": cmd_validate,
    "worldlines": cmd_worldlines,
    "equivariance": cmd_equivariance,
    "plots": cmd_plots,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 2
    try:
        sc = load_scenario(args.scenario)
        out_dir = args.out if args.out is not None else sc.outputs_dir
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        seed = args.seed if args.seed is not None else sc.seed
        core = _manifest_core(args.command, args.scenario, seed, args.threads)
        return COMMANDS[args.command](sc, out_dir, args, core)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BohmDiracError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
