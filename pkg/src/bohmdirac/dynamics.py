"""The guidance law on a leaf family and its trajectory integrator.

Velocities come from the probability current tensor contracted with the
coordinate-scaled covector m = (1, -f_x) at every other particle's
position:

    v_k^mu = f_t(t, X_k) * j_k^mu / (m_nu j_k^nu),

where j_k is the slot current of particle k.  This is algebraically equal
to the unit-normal formula (the induced-volume factors cancel between
numerator and denominator) and stays finite at isolated null leaf points.
Two facts follow directly and are enforced exactly:

* where f_t = 0 (a degeneracy/plateau), the velocity is the zero vector,
  so frozen particles keep bit-identical positions;
* v^0 = f_t + f_x v^1, so evolving only the spatial coordinates and
  reconstructing x0 = f(t, x1) reproduces the full space-time velocity.

The integrator is classical RK4 on the reduced coordinates with a
two-half-step Richardson error check, never stepping across the leaf
family's non-smooth parameter values.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field

import numpy as np

from .dirac import DEFAULT_REP, psi_tensor
from .errors import NodeError, RankError
from .foliation import EPS_DEG

_LETTERS = string.ascii_lowercase

STATUS_COMPLETED = "completed"
STATUS_NODE_ABORT = "node_abort"
STATUS_WINDOW_EXIT = "window_exit"


@dataclass
class Configuration:
    """N on-leaf events: x0[i] = f(t, x1[i])."""

    t: float
    x1: np.ndarray
    x0: np.ndarray

    @classmethod
    def on_leaf(cls, spec, t, x1):
        x1 = np.atleast_1d(np.asarray(x1, dtype=float))
        x0 = np.asarray(spec.f(t, x1), dtype=float)
        return cls(t=float(t), x1=x1, x0=np.atleast_1d(x0))

    @property
    def n_particles(self):
        return self.x1.size

    def events(self):
        return np.stack([self.x0, self.x1], axis=-1)

    def on_leaf_residual(self, spec):
        return float(np.max(np.abs(self.x0 - np.asarray(spec.f(self.t, self.x1)))))


@dataclass
class KinkEvent:
    """Direction discontinuity of one particle across a plateau crossing."""

    particle: int
    t_enter: float
    t_exit: float
    dir_in: np.ndarray
    dir_out: np.ndarray
    angle: float
    near_lightlike: bool = False


@dataclass
class Trajectory:
    """t-parametrized world lines of all N particles."""

    ts: np.ndarray
    x1: np.ndarray       # (S, N)
    x0: np.ndarray       # (S, N)
    v: np.ndarray        # (S, N, 2)
    jdir: np.ndarray     # (S, N, 2) unit slot-current directions, future-pointing
    frozen: np.ndarray   # (S, N) bool
    status: str
    monotone: bool
    abort_t: float | None = None
    kinks: list = field(default_factory=list)

    @property
    def n_particles(self):
        return self.x1.shape[1]

    def final_configuration(self):
        return Configuration(t=float(self.ts[-1]), x1=self.x1[-1].copy(),
                             x0=self.x0[-1].copy())


@dataclass
class IntegratorOptions:
    h: float = 0.02
    tol: float = 1e-8
    eps_node: float = 1e-10
    max_halvings: int = 16
    forced_times: tuple = ()
    velocity_scale: float = 1.0   # negative-control hook; 1.0 in real runs
    spatial_window: tuple | None = None
    node_scale: float | None = None


# ---------------------------------------------------------------------------
# slot currents and velocities (batched over configurations)


def _slot_current_einsum(n, k):
    bra = _LETTERS[:n]
    ket = _LETTERS[n:2 * n]
    mu = _LETTERS[2 * n]
    subs = ["..." + bra]
    for j in range(n):
        if j == k:
            subs.append(f"{mu}{bra[j]}{ket[j]}")
        else:
            subs.append(f"...{bra[j]}{ket[j]}")
    subs.append("..." + ket)
    return ",".join(subs) + "->..." + mu


def slot_currents_batch(wave, spec, t, ys, rep=DEFAULT_REP):
    """All N slot currents at configurations ys (..., N) on leaf t.

    Returns (j, D) with j of shape (..., N, 2) and D = m.j (the full
    contraction, identical for every slot) of shape (...).
    """
    n = wave.n_particles
    ys = np.asarray(ys, dtype=float)
    x0 = np.asarray(spec.f(t, ys), dtype=float)
    fx = np.asarray(spec.f_x(t, ys), dtype=float)
    psi = psi_tensor(wave, x0, ys)
    w = rep.w_matrices()
    a_mats = w[0] - fx[..., None, None] * w[1]   # gamma0 (gamma.m) per slot
    j = np.empty(ys.shape + (2,), dtype=float)
    for k in range(n):
        ops = [psi.conj()]
        for jslot in range(n):
            if jslot == k:
                ops.append(w)
            else:
                ops.append(a_mats[..., jslot, :, :])
        ops.append(psi)
        jk = np.einsum(_slot_current_einsum(n, k), *ops, optimize=True)
        j[..., k, :] = jk.real
    d = j[..., 0, 0] - fx[..., 0] * j[..., 0, 1]
    return j, d


def slot_current(wave, spec, config, k, rep=DEFAULT_REP):
    """Slot-k current 2-vector at one configuration."""
    j, _ = slot_currents_batch(wave, spec, config.t, config.x1[None, :], rep)
    return j[0, k]


def velocity_field(wave, spec, t, ys, rep=DEFAULT_REP, velocity_scale=1.0):
    """Velocities, slot currents and density at configurations ys (..., N).

    Where f_t = 0 the velocity is exactly zero; division is guarded so
    node configurations yield finite garbage that callers must mask via
    the returned density.
    """
    ys = np.asarray(ys, dtype=float)
    j, d = slot_currents_batch(wave, spec, t, ys, rep)
    ft = np.asarray(spec.f_t(t, ys), dtype=float)
    denom = np.where(d == 0.0, 1.0, d)
    v = ft[..., None] * (j / denom[..., None, None])
    if velocity_scale != 1.0:
        v = v * velocity_scale
    return v, j, d


def config_velocity(wave, spec, t, config, eps_node=1e-10, node_scale=1.0,
                    rep=DEFAULT_REP, velocity_scale=1.0):
    """Velocity 2-vectors of all particles at one on-leaf configuration.

    Raises :class:`NodeError` when the normal contraction of the current
    falls below ``eps_node * node_scale`` (a wave-function node).
    """
    ys = config.x1 if isinstance(config, Configuration) else np.asarray(config, float)
    v, j, d = velocity_field(wave, spec, t, ys[None, :], rep, velocity_scale)
    if abs(d[0]) <= eps_node * node_scale:
        raise NodeError(t)
    return v[0]


def median_density_scale(wave, spec, t, windows, n=129, rep=DEFAULT_REP):
    """Median of the normal-contracted current over a leaf grid.

    Crude reference scale for node detection; prefer
    :func:`ensemble_density_scale` when sample positions are available,
    since a uniform grid is dominated by empty space.
    """
    axes = [np.linspace(lo, hi, n) for lo, hi in windows]
    grids = np.meshgrid(*axes, indexing="ij")
    ys = np.stack([g.ravel() for g in grids], axis=-1)
    _, d = slot_currents_batch(wave, spec, t, ys, rep)
    return float(np.median(np.abs(d)))


def ensemble_density_scale(wave, spec, t, ys, rep=DEFAULT_REP):
    """Median density over given configurations: the natural node scale.

    With |psi|^2-distributed configurations this is the leaf-median of
    the normal-contracted current; genuine nodes sit many orders below
    it, round-off does not.
    """
    _, d = slot_currents_batch(wave, spec, t, np.asarray(ys, dtype=float), rep)
    return float(np.median(np.abs(d)))


# ---------------------------------------------------------------------------
# trajectory integration


def _segment_times(spec, t0, t1, forced=()):
    cuts = {float(t0), float(t1)}
    for tb in tuple(spec.t_breakpoints) + tuple(spec.freeze_times) + tuple(forced):
        tb = float(tb)
        if min(t0, t1) < tb < max(t0, t1):
            cuts.add(tb)
    return sorted(cuts) if t1 >= t0 else sorted(cuts, reverse=True)


class _BatchState:
    def __init__(self, m, n):
        self.alive = np.ones(m, dtype=bool)
        self.status = np.zeros(m, dtype=np.int8)  # 0 ok, 1 node, 2 window
        self.abort_t = np.full(m, np.nan)


def integrate_batch(wave, spec, t0, ys0, t1, opts=None, rep=DEFAULT_REP,
                    on_sample=None, sample_needs_velocity=True):
    """RK4 transport of a batch of configurations from leaf t0 to t1.

    ``on_sample(t, ys, v, j, d, alive)`` is called at t0 and after every
    accepted macro step (forced times are always landed on exactly); with
    ``sample_needs_velocity=False`` the velocity arguments are None and
    the extra field evaluation per step is skipped.
    Returns (ys, state) with dead samples frozen at their abort position.
    """
    opts = opts or IntegratorOptions()
    ys = np.array(ys0, dtype=float, copy=True)
    if ys.ndim != 2:
        raise ValueError("ys0 must have shape (M, N)")
    m, n = ys.shape
    state = _BatchState(m, n)
    node_scale = opts.node_scale
    if node_scale is None and m > 0:
        node_scale = ensemble_density_scale(wave, spec, t0, ys, rep)
    node_floor = opts.eps_node * (node_scale if node_scale else 1.0)

    def vel(t, y, pending_dead):
        v, j, d = velocity_field(wave, spec, t, y, rep, opts.velocity_scale)
        nodes = (np.abs(d) <= node_floor) & state.alive & ~pending_dead
        if np.any(nodes):
            pending_dead |= nodes
        v[~state.alive | pending_dead] = 0.0
        return v[..., 1], v, j, d  # only dx1/dt drives the reduced system

    def rk4(t, y, dt, pending_dead, k1=None):
        if k1 is None:
            k1 = vel(t, y, pending_dead)[0]
        k2 = vel(t + 0.5 * dt, y + 0.5 * dt * k1, pending_dead)[0]
        k3 = vel(t + 0.5 * dt, y + 0.5 * dt * k2, pending_dead)[0]
        k4 = vel(t + dt, y + dt * k3, pending_dead)[0]
        return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), k1

    if on_sample is not None:
        if sample_needs_velocity:
            _, v, j, d = vel(t0, ys, np.zeros(m, dtype=bool))
            on_sample(t0, ys, v, j, d, state.alive.copy())
        else:
            on_sample(t0, ys, None, None, None, state.alive.copy())

    h_min = opts.h * 2.0 ** (-opts.max_halvings)
    cuts = _segment_times(spec, t0, t1, opts.forced_times)
    for seg_start, seg_end in zip(cuts[:-1], cuts[1:]):
        t = seg_start
        h_cur = min(opts.h, abs(seg_end - seg_start))
        direction = 1.0 if seg_end >= seg_start else -1.0
        while (seg_end - t) * direction > 1e-14:
            dt = direction * min(h_cur, abs(seg_end - t))
            pending = np.zeros(m, dtype=bool)
            y_full, k1 = rk4(t, ys, dt, pending)
            y_mid, _ = rk4(t, ys, 0.5 * dt, pending, k1=k1)
            y_half, _ = rk4(t + 0.5 * dt, y_mid, 0.5 * dt, pending)
            err = np.abs(y_half - y_full)[state.alive & ~pending]
            err_max = float(err.max() / 15.0) if err.size else 0.0
            if err_max > opts.tol and abs(dt) > h_min:
                h_cur = 0.5 * abs(dt)
                continue
            t_new = seg_end if abs((t + dt) - seg_end) < 1e-13 else t + dt
            ys = y_half
            newly_node = pending & state.alive
            if np.any(newly_node):
                state.status[newly_node] = 1
                state.abort_t[newly_node] = t_new
                state.alive &= ~newly_node
            if opts.spatial_window is not None:
                lo, hi = opts.spatial_window
                out = ((ys < lo) | (ys > hi)).any(axis=1) & state.alive
                if np.any(out):
                    state.status[out] = 2
                    state.abort_t[out] = t_new
                    state.alive &= ~out
            t = t_new
            if err_max < opts.tol / 100.0:
                h_cur = min(2.0 * h_cur, opts.h)
            if on_sample is not None:
                if sample_needs_velocity:
                    _, v, j, d = vel(t, ys, np.zeros(m, dtype=bool))
                    on_sample(t, ys, v, j, d, state.alive.copy())
                else:
                    on_sample(t, ys, None, None, None, state.alive.copy())
            if not state.alive.any():
                return ys, state
    return ys, state


def _unit_future(j):
    norms = np.linalg.norm(j, axis=-1, keepdims=True)
    safe = np.where(norms == 0.0, 1.0, norms)
    return j / safe


_STATUS_NAMES = {0: STATUS_COMPLETED, 1: STATUS_NODE_ABORT, 2: STATUS_WINDOW_EXIT}


def integrate_trajectories(wave, spec, t0, ys0, t1, opts=None, rep=DEFAULT_REP):
    """Integrate many initial configurations at once, recording full histories.

    Returns one :class:`Trajectory` per row of ys0 (M, N).  All rows share
    the accepted step times (step control takes the worst sample), which
    keeps the batch fully vectorized.
    """
    opts = opts or IntegratorOptions()
    ys0 = np.asarray(ys0, dtype=float)
    rec = {"ts": [], "x1": [], "v": [], "jdir": [], "frozen": []}

    def on_sample(t, ys, v, j, d, alive):
        rec["ts"].append(t)
        rec["x1"].append(ys.copy())
        rec["v"].append(v.copy())
        rec["jdir"].append(_unit_future(j))
        ft = np.asarray(spec.f_t(t, ys), dtype=float)
        rec["frozen"].append(np.abs(ft) <= EPS_DEG)

    _, state = integrate_batch(wave, spec, t0, ys0, t1, opts, rep, on_sample)
    ts = np.array(rec["ts"])
    x1 = np.array(rec["x1"])          # (S, M, N)
    v = np.array(rec["v"])
    jdir = np.array(rec["jdir"])
    frozen = np.array(rec["frozen"])
    x0 = np.asarray(spec.f(ts[:, None, None], x1), dtype=float)
    out = []
    for i in range(ys0.shape[0]):
        status = _STATUS_NAMES[int(state.status[i])]
        out.append(Trajectory(
            ts=ts, x1=x1[:, i], x0=x0[:, i], v=v[:, i], jdir=jdir[:, i],
            frozen=frozen[:, i], status=status, monotone=spec.monotone,
            abort_t=None if status == STATUS_COMPLETED else float(state.abort_t[i]),
        ))
    return out


def integrate(wave, spec, t0, config0, t1, opts=None, rep=DEFAULT_REP):
    """Integrate one configuration; returns the sampled :class:`Trajectory`."""
    ys0 = (config0.x1 if isinstance(config0, Configuration)
           else np.asarray(config0, dtype=float))[None, :]
    return integrate_trajectories(wave, spec, t0, ys0, t1, opts, rep)[0]


# ---------------------------------------------------------------------------
# kinks


def _bisect_freeze_time(spec, t_lo, t_hi, y_lo, y_hi, k, eps_deg, tol=1e-10):
    """Time where |f_t| crosses eps_deg along the (interpolated) world line."""
    def frozen(tau):
        w = 0.0 if t_hi == t_lo else (tau - t_lo) / (t_hi - t_lo)
        y = (1 - w) * y_lo[k] + w * y_hi[k]
        return abs(float(spec.f_t(tau, y))) <= eps_deg

    lo, hi = t_lo, t_hi
    f_lo = frozen(lo)
    for _ in range(200):
        if abs(hi - lo) < tol:
            break
        mid = 0.5 * (lo + hi)
        if frozen(mid) == f_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def detect_kinks(traj, spec, theta_kink=1e-6, eps_deg=EPS_DEG):
    """Direction-limit comparison across every plateau crossing.

    The one-sided limits are read off the recorded slot-current
    directions at the first/last frozen sample (the current is continuous
    across the freeze, only f_t vanishes), oriented by the sign of f_t on
    the approaching side.  A kink is declared when the angle exceeds
    ``theta_kink``; near-lightlike limits are compared as 1-d subspaces
    and flagged.
    """
    events = []
    s_count, n = traj.frozen.shape
    for k in range(n):
        flags = traj.frozen[:, k]
        i = 0
        while i < s_count:
            if not flags[i]:
                i += 1
                continue
            i0 = i
            while i + 1 < s_count and flags[i + 1]:
                i += 1
            i1 = i
            i += 1
            if i0 == 0 or i1 == s_count - 1:
                continue  # run touches an endpoint: not a crossing
            t_enter = _bisect_freeze_time(spec, traj.ts[i0 - 1], traj.ts[i0],
                                          traj.x1[i0 - 1], traj.x1[i0], k, eps_deg)
            t_exit = _bisect_freeze_time(spec, traj.ts[i1], traj.ts[i1 + 1],
                                         traj.x1[i1], traj.x1[i1 + 1], k, eps_deg)
            s_in = np.sign(float(spec.f_t(traj.ts[i0 - 1], traj.x1[i0 - 1, k]))) or 1.0
            s_out = np.sign(float(spec.f_t(traj.ts[i1 + 1], traj.x1[i1 + 1, k]))) or 1.0
            d_in = s_in * traj.jdir[i0, k]
            d_out = s_out * traj.jdir[i1, k]
            near_null = min(abs(abs(d_in[0]) - abs(d_in[1])),
                            abs(abs(d_out[0]) - abs(d_out[1]))) < 1e-6
            dot = float(np.dot(d_in, d_out))
            if near_null:
                dot = abs(dot)  # compare as 1-d subspaces
            angle = float(np.arccos(np.clip(dot, -1.0, 1.0)))
            if angle > theta_kink:
                events.append(KinkEvent(particle=k, t_enter=float(t_enter),
                                        t_exit=float(t_exit), dir_in=d_in,
                                        dir_out=d_out, angle=angle,
                                        near_lightlike=bool(near_null)))
    traj.kinks = events
    return events


# ---------------------------------------------------------------------------
# causal character, current form, kernel check, containment


@dataclass
class CausalReport:
    segments: int
    violations: int
    worst_margin: float
    monotone_violations: int

    @property
    def ok(self):
        return self.violations == 0 and self.monotone_violations == 0


def roundoff_floor(x0, x1, factor=8.0, atol=1e-9):
    """Displacements at or below this are numerical noise, not motion.

    Near a freeze the true step displacement sits below the integrator's
    resolution (and often below one ulp of the coordinates); comparing
    such differences is meaningless, so causal checks treat them as zero.
    ``atol`` is the absolute sub-resolution floor; any real motion covers
    many orders of magnitude more per step.
    """
    eps = np.finfo(float).eps
    s0 = np.maximum(factor * eps * np.maximum(1.0, np.abs(x0)), atol)
    s1 = np.maximum(factor * eps * np.maximum(1.0, np.abs(x1)), atol)
    return s0, s1


def causal_character(traj, tol=1e-12):
    """Check every consecutive displacement is causal (and future for monotone)."""
    d0 = np.diff(traj.x0, axis=0)
    d1 = np.diff(traj.x1, axis=0)
    f0, f1 = roundoff_floor(traj.x0[1:], traj.x1[1:])
    tiny = (np.abs(d0) <= f0) & (np.abs(d1) <= f1)
    margin = d0 * d0 - d1 * d1 + tol * d0 * d0
    violations = int(np.count_nonzero((margin < 0.0) & ~tiny))
    mono_viol = 0
    if traj.monotone:
        bad = (d0 < -tol * np.maximum(np.abs(d0), 1.0)) & ~tiny
        mono_viol = int(np.count_nonzero(bad))
    worst = float(margin[~tiny].min()) if np.any(~tiny) else 0.0
    return CausalReport(segments=int(d0.size), violations=violations,
                        worst_margin=worst, monotone_violations=mono_viol)


_EPS2 = np.array([[0.0, 1.0], [-1.0, 0.0]])  # eps_{01} = +1


def current_form_J(wave, events, rep=DEFAULT_REP):
    """Levi-Civita dual of the current tensor: one covariant index per slot."""
    from .dirac import current_tensor

    j = current_tensor(wave, events, rep).components
    n = j.ndim
    out = j
    for _ in range(n):
        # contract the leading slot with eps and move the new index to the back
        out = np.tensordot(_EPS2, out, axes=(1, 0))
        out = np.moveaxis(out, 0, -1)
    return out


def kernel_check(wave, spec, t, config, velocities=None, rep=DEFAULT_REP,
                 eps_node=1e-10, node_scale=1.0):
    """Alignment of the trajectory tangent with the kernel of the pulled-back form.

    For N = 2 the current form pulls back to an antisymmetric 3x3 matrix
    on the chart (t, y1, y2); its null direction must be parallel to
    (1, v1^1, v2^1).  Returns (sine_of_angle, null_direction).
    """
    if wave.n_particles != 2:
        raise ValueError("kernel_check is defined for N = 2")
    ys = config.x1 if isinstance(config, Configuration) else np.asarray(config, float)
    j, d = slot_currents_batch(wave, spec, t, ys[None, :], rep)
    if abs(d[0]) <= eps_node * node_scale:
        raise RankError(f"current form numerically zero at t={t}")
    if velocities is None:
        velocities = config_velocity(wave, spec, t, Configuration.on_leaf(spec, t, ys),
                                     eps_node=eps_node, node_scale=node_scale, rep=rep)
    from .dirac import current_tensor

    x0 = np.asarray(spec.f(t, ys), dtype=float)
    events = np.stack([x0, ys], axis=-1)
    jt = current_tensor(wave, events, rep).components
    jf = np.einsum("ka,lb,ab->kl", _EPS2, _EPS2, jt)

    ft = np.asarray(spec.f_t(t, ys), dtype=float)
    fx = np.asarray(spec.f_x(t, ys), dtype=float)
    e_t = (np.array([ft[0], 0.0]), np.array([ft[1], 0.0]))
    e_1 = (np.array([fx[0], 1.0]), np.zeros(2))
    e_2 = (np.zeros(2), np.array([fx[1], 1.0]))
    basis = [e_t, e_1, e_2]
    p = np.zeros((3, 3))
    for a in range(3):
        for b in range(3):
            u1, u2 = basis[a]
            w1, w2 = basis[b]
            p[a, b] = u1 @ jf @ w2 - w1 @ jf @ u2
    if np.abs(p).max() < 1e-250:
        raise RankError("pulled-back form vanishes")
    _, _, vt = np.linalg.svd(p)
    null = vt[-1]
    tangent = np.array([1.0, velocities[0, 1], velocities[1, 1]])
    tangent /= np.linalg.norm(tangent)
    residual = float(np.linalg.norm(np.cross(null, tangent)))
    return residual, null


@dataclass
class ContainmentReport:
    checked: int
    exits: int
    entries: int

    @property
    def violations(self):
        return self.exits + self.entries

    @property
    def ok(self):
        return self.violations == 0


def region_containment_check(trajs, region, t_interval):
    """Count particles crossing the boundary of ``region`` during ``t_interval``.

    ``region`` is an x-interval (x_lo, x_hi); use -inf/inf for half-lines.
    Particles inside at the start must stay inside until the end, and
    particles outside must stay outside.
    """
    x_lo, x_hi = region
    t1, t2 = t_interval
    checked = exits = entries = 0
    for traj in trajs:
        sel = (traj.ts >= t1 - 1e-12) & (traj.ts <= t2 + 1e-12)
        if not np.any(sel):
            continue
        xs = traj.x1[sel]
        inside = (xs >= x_lo) & (xs <= x_hi)
        start = inside[0]
        checked += traj.n_particles
        exits += int(np.count_nonzero(start & ~inside.all(axis=0)))
        entries += int(np.count_nonzero(~start & inside.any(axis=0)))
    return ContainmentReport(checked=checked, exits=exits, entries=entries)
