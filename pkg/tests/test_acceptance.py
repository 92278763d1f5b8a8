"""End-to-end acceptance suite.

Runs the production scenario once (M = 5000 entangled pair on the
degenerate leaf family, transported across the whole plateau) and checks
every gate at its stated tolerance, printing one PASS/FAIL line per
criterion.  Run with `pytest -s tests/test_acceptance.py` to see them.
"""

import math
import time

import numpy as np
import pytest

from bohmdirac import dirac, dynamics as dyn, equivariance as eq, foliation as fol
from bohmdirac.scenario import load_scenario

from conftest import REPO_ROOT

HALF_PI = math.pi / 2
THREADS = 2
RUNTIME_BUDGET_S = 300.0  # "laptop, 4 cores"; this suite runs on >= 2


def report(num, name, ok, detail=""):
    print(f"\nACCEPTANCE {num:>2} {name:<28}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


@pytest.fixture(scope="module")
def big_run():
    """The criterion-1 pipeline, shared by several criteria."""
    sc = load_scenario(REPO_ROOT / "scenarios" / "appendix.toml")
    spec = sc.foliation
    t_start = time.perf_counter()
    ld0 = eq.LeafDensity(sc.wave, spec, sc.t0, sc.windows)
    positions = eq.sample_positions(ld0, sc.m, sc.seed)
    res = eq.transport(
        positions, sc.wave, spec, sc.t0, sc.t1, sc.integrator,
        watch_region=spec.plateau, snapshot_times=(-HALF_PI, HALF_PI),
        threads=THREADS)
    ld1 = eq.LeafDensity(sc.wave, spec, sc.t1, sc.windows)
    comp = eq.compare(res.positions[res.alive], ld1)
    wall = time.perf_counter() - t_start
    return {"sc": sc, "spec": spec, "positions0": positions, "res": res,
            "comp": comp, "wall": wall, "ld0": ld0}


def test_criterion_1_equivariance_degenerate(big_run):
    comp, res, sc = big_run["comp"], big_run["res"], big_run["sc"]
    ks = max(comp.ks_per_marginal)
    node_frac = res.node_aborts / sc.m
    ok = (ks < 0.03) and (node_frac < 0.001) and (big_run["wall"] < RUNTIME_BUDGET_S)
    assert report(1, "equivariance through plateau", ok,
                  f"KS={comp.ks_per_marginal} nodes={res.node_aborts}/{sc.m} "
                  f"wall={big_run['wall']:.1f}s")


def test_criterion_2_conservation(entangled_wave, windows2):
    drifts = {}
    for spec, (ta, tb) in [
        (fol.flat_foliation(), (-2.0, 2.0)),
        (fol.appendix_foliation(), (-2.0, 2.0)),
        (fol.appendix_foliation2(), (-2.0, 2.0)),
        # the backward family is spacelike only for |t| <= 0.9
        (fol.backward_example(), (-0.9, 0.9)),
    ]:
        grid = np.linspace(ta, tb, 41)
        drifts[spec.name], _ = eq.total_probability_scan(
            entangled_wave, spec, grid, windows2)
    ok = all(d < 1e-4 for d in drifts.values())
    detail = " ".join(f"{k}={v:.2e}" for k, v in drifts.items())
    assert report(2, "Z(t) conservation", ok, detail)


def test_criterion_3_plateau_freeze(big_run):
    res = big_run["res"]
    lo = res.snapshots[-HALF_PI]
    hi = res.snapshots[HALF_PI]
    frozen = lo[:, 0] < -HALF_PI
    identical = np.array_equal(lo[frozen, 0], hi[frozen, 0])
    ok = identical and frozen.sum() > 100 and res.containment_violations == 0
    assert report(3, "plateau freeze + containment", ok,
                  f"frozen={int(frozen.sum())} bit_identical={identical} "
                  f"containment_violations={res.containment_violations}")


@pytest.fixture(scope="module")
def kink_runs(entangled_wave, product_wave, appendix_spec, big_run):
    """100 trajectories whose first particle crosses the plateau."""
    pos0 = big_run["positions0"]
    inside = pos0[:, 0] < -HALF_PI - 0.05
    ys0 = pos0[inside][:100]
    assert ys0.shape[0] == 100
    opts = dyn.IntegratorOptions(h=0.02)
    ent = dyn.integrate_trajectories(entangled_wave, appendix_spec, -2.0, ys0, 2.0, opts)
    prod = dyn.integrate_trajectories(product_wave, appendix_spec, -2.0, ys0, 2.0, opts)
    return ent, prod


def test_criterion_4_kink_dichotomy(kink_runs, appendix_spec):
    ent, prod = kink_runs
    ent_angles = [k.angle for traj in ent
                  for k in dyn.detect_kinks(traj, appendix_spec, theta_kink=1e-6)]
    prod_kinks = [k for traj in prod
                  for k in dyn.detect_kinks(traj, appendix_spec, theta_kink=1e-6)]
    strong = [a for a in ent_angles if a > 1e-3]
    ok = len(strong) >= 1 and len(prod_kinks) == 0
    assert report(4, "kink dichotomy", ok,
                  f"entangled: {len(strong)} kinks >1e-3 "
                  f"(max={max(ent_angles, default=0.0):.2e}); "
                  f"product: {len(prod_kinks)} at 1e-6")


def test_criterion_5_causality(big_run, kink_runs, entangled_wave, backward_spec,
                               windows2):
    res = big_run["res"]
    viols = res.causal_violations
    segments = res.causal_segments
    # backward-family ensemble (non-monotone leaves)
    ld_b = eq.LeafDensity(entangled_wave, backward_spec, -0.8, windows2)
    ys_b = eq.sample_positions(ld_b, 800, seed=101)
    res_b = eq.transport(ys_b, entangled_wave, backward_spec, -0.8, 0.8,
                         dyn.IntegratorOptions(h=0.01, spatial_window=(-14, 14)),
                         threads=THREADS)
    viols += res_b.causal_violations
    segments += res_b.causal_segments
    for traj in kink_runs[0] + kink_runs[1]:
        rep = dyn.causal_character(traj)
        viols += rep.violations + rep.monotone_violations
        segments += rep.segments
    ok = viols == 0
    assert report(5, "causal character", ok,
                  f"violations={viols} over {segments} segments "
                  f"(incl. backward ensemble)")


def test_criterion_6_kernel_of_current_form(entangled_wave, windows2):
    rng = np.random.default_rng(606)
    worst = {}
    for spec in (fol.flat_foliation(), fol.appendix_foliation(),
                 fol.appendix_foliation2(), fol.backward_example()):
        t_lo = max(spec.window.t_min, -2.5)
        t_hi = min(spec.window.t_max, 2.5)
        scale = dyn.median_density_scale(entangled_wave, spec, 0.0,
                                         [(-3.5, 3.5), (-3.5, 3.5)], n=65)
        checked = 0
        w = 0.0
        while checked < 1000:
            t = rng.uniform(t_lo, t_hi)
            ys = rng.uniform(-3.5, 3.5, 2)
            _, d = dyn.slot_currents_batch(entangled_wave, spec, t, ys[None, :])
            if abs(d[0]) < 1e-6 * scale:
                continue  # stay off nodes, as specified
            cfg = dyn.Configuration.on_leaf(spec, t, ys)
            r, _ = dyn.kernel_check(entangled_wave, spec, t, cfg,
                                    node_scale=scale, eps_node=1e-8)
            w = max(w, r)
            checked += 1
        worst[spec.name] = w
    ok = all(v < 1e-8 for v in worst.values())
    detail = " ".join(f"{k}={v:.1e}" for k, v in worst.items())
    assert report(6, "kernel-of-J alignment", ok, detail)


def _few_mode_entangled():
    """Plane-wave entangled pair: O(1) amplitudes keep the h = 1e-5
    difference quotients far above the float cancellation floor."""
    def spw(*km):
        return dirac.SingleParticleWave(
            mass=1.0, modes=tuple(dirac.PlaneWaveMode(k, s, a) for k, s, a in km))

    return dirac.MultiTimeWave(
        masses=(1.0, 1.0),
        terms=(
            (1.0, (spw((0.9, 1, 1.0), (-0.4, 1, 0.6j), (0.2, -1, 0.4)),
                   spw((-0.7, 1, 0.8), (1.1, 1, 0.5)))),
            (0.6 + 0.3j, (spw((0.3, 1, 0.7), (-1.2, -1, 0.5)),
                          spw((0.5, 1, 1.0), (-0.9, 1, 0.3j)))),
        ))


def test_criterion_7_residual_convergence(entangled_wave):
    hs = np.array([1e-3, 1e-4, 1e-5])
    fac = entangled_wave.terms[0][1][0]  # production 64-mode packet
    dirac_res = np.array([dirac.dirac_residual(fac, (0.37, -0.91), h=h) for h in hs])
    slope_d = np.polyfit(np.log(hs), np.log(dirac_res), 1)[0]
    wave = _few_mode_entangled()
    events = [(0.23, -0.41), (0.11, 0.67)]
    slopes_c = []
    for slot in (0, 1):
        cont_res = np.array([
            np.abs(dirac.continuity_residual(wave, events, slot=slot, h=h)).max()
            for h in hs])
        slopes_c.append(np.polyfit(np.log(hs), np.log(cont_res), 1)[0])
    ok = abs(slope_d - 2.0) < 0.1 and all(abs(s - 2.0) < 0.1 for s in slopes_c)
    assert report(7, "O(h^2) residual convergence", ok,
                  f"dirac slope={slope_d:.3f}, continuity slopes="
                  f"{[round(float(s), 3) for s in slopes_c]}")


def test_criterion_8_reparametrization():
    spec_a = fol.appendix_foliation()
    spec_b = fol.appendix_foliation2()
    residuals = {}
    for t in (-3.0, -1.0, 0.0, 1.0, 3.0):
        tp, res = fol.reparam_match(spec_a, spec_b, t)
        residuals[t] = res
    ok = all(r < 1e-6 for r in residuals.values())
    detail = " ".join(f"t={t:g}:{r:.1e}" for t, r in residuals.items())
    assert report(8, "reparametrization match", ok, detail)


def test_criterion_9_no_signaling(entangled_wave, appendix_spec, windows2):
    probes = np.linspace(-2.9, -1.8, 12)
    sup = eq.no_signaling_marginal(entangled_wave, appendix_spec,
                                   (-3.2, -HALF_PI), (-1.0, 0.0, 1.0),
                                   probes, windows2)
    ok = sup < 1e-3
    assert report(9, "no-signaling marginal", ok, f"sup rel drift={sup:.2e}")


def test_criterion_10_negative_controls(big_run, entangled_wave, appendix_spec,
                                        windows2):
    # (a) mis-scaled velocity field must break the KS gate of criterion 1
    pos0 = big_run["positions0"][:1500]
    opts = dyn.IntegratorOptions(h=0.02, spatial_window=(-14.0, 14.0),
                                 velocity_scale=1.1)
    res_bad = eq.transport(pos0, entangled_wave, appendix_spec, -2.0, 2.0, opts,
                           threads=THREADS)
    ld1 = eq.LeafDensity(entangled_wave, appendix_spec, 2.0, windows2)
    comp_bad = eq.compare(res_bad.positions[res_bad.alive], ld1)
    ks_control = max(comp_bad.ks_per_marginal) >= 0.03

    # (b) superluminal leaf slope must fail validation
    bad_spec = fol.from_function("tilted2", lambda t, x: np.asarray(t + 2.0 * x),
                                 fol.Window(-2, 2, -2, 2))
    validation_control = not fol.validate(bad_spec, grid=(21, 21)).ok

    # (c) a fabricated spacelike segment must fail the causal check
    traj = dyn.Trajectory(
        ts=np.array([0.0, 0.1]), x1=np.array([[0.0], [0.5]]),
        x0=np.array([[0.0], [0.1]]), v=np.zeros((2, 1, 2)),
        jdir=np.zeros((2, 1, 2)), frozen=np.zeros((2, 1), dtype=bool),
        status="completed", monotone=True)
    causal_control = dyn.causal_character(traj).violations == 1

    ok = ks_control and validation_control and causal_control
    assert report(10, "negative controls", ok,
                  f"ks_bad={max(comp_bad.ks_per_marginal):.3f} (>=0.03), "
                  f"superluminal flagged={validation_control}, "
                  f"spacelike flagged={causal_control}")
