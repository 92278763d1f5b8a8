"""Ties trajectories to the distribution the dynamics is supposed to preserve.

The joint density used everywhere is the contraction of the current
tensor with the coordinate-scaled covector m = (1, -f_x) in every slot,

    D(x_1, ..., x_N) = j^{mu_1...mu_N} m_{mu_1}(x_1) ... m_{mu_N}(x_N),

which is the density of the leaf distribution with respect to coordinate
volume dx_1...dx_N (the induced-volume factors of the unit-normal form
are absorbed, so D stays finite at isolated null leaf points).  For a
finite mode sum D separates per particle,

    D = sum_{T,T'} conj(c_T) c_T' prod_k B_k^{T T'}(x_k),

with B the per-slot bilinears between term factors; normalization,
marginals and grid suprema are therefore exact tensor-product
Gauss-Legendre sums evaluated axis by axis.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .dirac import DEFAULT_REP
from .dynamics import (Configuration, IntegratorOptions, ensemble_density_scale,
                       integrate_batch, roundoff_floor)
from .errors import EnvelopeError, QuadratureWarning
from .foliation import degeneracy_at
from .quadrature import window_rule


def ks_critical(m, alpha=0.01):
    """One-sample Kolmogorov-Smirnov critical value sqrt(-ln(alpha/2)/2)/sqrt(m)."""
    return float(np.sqrt(-0.5 * np.log(alpha / 2.0)) / np.sqrt(m))


def ks_statistic(xs, cdf):
    """One-sample KS distance of xs against a cdf callable."""
    xs = np.sort(np.asarray(xs, dtype=float))
    m = xs.size
    if m == 0:
        raise ValueError("empty sample")
    f = np.clip(np.asarray(cdf(xs), dtype=float), 0.0, 1.0)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - f), np.max(f - (i - 1) / m)))


def energy_distance(xs, ys):
    """Energy distance between two point sets in R^N (diagnostic only)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)

    def mean_dist(a, b):
        d = a[:, None, :] - b[None, :, :]
        return float(np.mean(np.sqrt(np.sum(d * d, axis=-1))))

    return 2.0 * mean_dist(xs, ys) - mean_dist(xs, xs) - mean_dist(ys, ys)


# ---------------------------------------------------------------------------
# separable density machinery


def _coeff_outer(wave):
    c = np.array([c for c, _ in wave.terms], dtype=complex)
    return np.conj(c)[:, None] * c[None, :]


def axis_bilinears(wave, spec, t, slot, xs, rep=DEFAULT_REP):
    """B^{T T'}(x) = factor_T(e)^dag [gamma0 (gamma.m)] factor_T'(e) on the leaf.

    Shape (terms, terms, len(xs)); hermitian in the term indices.
    """
    xs = np.asarray(xs, dtype=float)
    x0 = np.asarray(spec.f(t, xs), dtype=float)
    fx = np.asarray(spec.f_x(t, xs), dtype=float)
    w = rep.w_matrices()
    a = w[0][None, :, :] - fx[:, None, None] * w[1][None, :, :]
    vals = np.stack([factors[slot].eval(x0, xs) for _, factors in wave.terms])
    return np.einsum("txa,xab,sxb->tsx", vals.conj(), a, vals)


def density_unnormalized(wave, spec, t, ys, rep=DEFAULT_REP):
    """D at configurations ys (..., N), evaluated via the separable form."""
    ys = np.asarray(ys, dtype=float)
    coeff = _coeff_outer(wave)
    prod = np.ones(coeff.shape + ys.shape[:-1], dtype=complex)
    for k in range(wave.n_particles):
        flat = ys[..., k].reshape(-1)
        b = axis_bilinears(wave, spec, t, k, flat, rep)
        prod = prod * b.reshape(coeff.shape + ys.shape[:-1])
    return np.einsum("ts,ts...->...", coeff, prod).real


def axis_flux_matrix(wave, spec, t, slot, window, rep=DEFAULT_REP, order=12,
                     x_edges=()):
    """Integral of the axis bilinears over the window: O^{T T'} = int B dx."""
    nodes, weights = window_rule(window, wave.max_abs_k(), order=order,
                                 extra_edges=x_edges)
    b = axis_bilinears(wave, spec, t, slot, nodes, rep)
    return np.einsum("tsx,x->ts", b, weights)


def normalize(wave, spec, t, windows, quad_order=12, rep=DEFAULT_REP, x_edges=(),
              warn_tol=1e-6):
    """Total probability Z(t) of D over the window box.

    Tensor-product Gauss-Legendre quadrature; for the separable integrand
    the tensor sum factorizes exactly into per-axis sums.  The error
    estimate compares two quadrature orders and raises
    :class:`QuadratureWarning` when it exceeds ``warn_tol``.
    """
    coeff = _coeff_outer(wave)

    def z_at(order):
        acc = coeff.copy()
        for k, win in enumerate(windows):
            acc = acc * axis_flux_matrix(wave, spec, t, k, win, rep, order, x_edges)
        return float(np.sum(acc).real)

    z = z_at(quad_order)
    z_ref = z_at(quad_order + 6)
    err = abs(z - z_ref) / max(abs(z_ref), 1e-300)
    if err > warn_tol:
        warnings.warn(f"quadrature error estimate {err:.2e} exceeds {warn_tol:g}",
                      QuadratureWarning)
    return z_ref


@dataclass
class LeafDensity:
    """Normalized joint density on one leaf, with cached per-axis quadrature."""

    wave: object
    spec: object
    t: float
    windows: tuple
    quad_order: int = 12
    x_edges: tuple = ()
    rep: object = DEFAULT_REP
    _flux: list = field(default_factory=list, repr=False)
    _z: float | None = None

    def __post_init__(self):
        self.windows = tuple((float(a), float(b)) for a, b in self.windows)
        if len(self.windows) != self.wave.n_particles:
            raise ValueError("one window per particle required")

    def flux_matrices(self):
        if not self._flux:
            self._flux = [axis_flux_matrix(self.wave, self.spec, self.t, k, win,
                                           self.rep, self.quad_order, self.x_edges)
                          for k, win in enumerate(self.windows)]
        return self._flux

    @property
    def z(self):
        if self._z is None:
            acc = _coeff_outer(self.wave).copy()
            for o in self.flux_matrices():
                acc = acc * o
            self._z = float(np.sum(acc).real)
        return self._z

    def density(self, ys):
        """Normalized joint density at configurations ys (..., N)."""
        return density_unnormalized(self.wave, self.spec, self.t, ys, self.rep) / self.z

    def marginal_pdf(self, slot, xs):
        """Normalized marginal density of one particle's spatial coordinate."""
        coeff = _coeff_outer(self.wave).copy()
        for k, o in enumerate(self.flux_matrices()):
            if k != slot:
                coeff = coeff * o
        b = axis_bilinears(self.wave, self.spec, self.t, slot,
                           np.asarray(xs, dtype=float), self.rep)
        return np.einsum("ts,tsx->x", coeff, b).real / self.z

    def marginal_cdf(self, slot, n_panels=600, order=8):
        """Monotone interpolant of the marginal cumulative distribution."""
        lo, hi = self.windows[slot]
        edges = np.linspace(lo, hi, n_panels + 1)
        base_x, base_w = np.polynomial.legendre.leggauss(order)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1:] - edges[:-1])
        nodes = (mid[:, None] + half[:, None] * base_x[None, :]).ravel()
        pdf = self.marginal_pdf(slot, nodes).reshape(n_panels, order)
        panel = np.einsum("pq,q->p", pdf, base_w) * half
        cum = np.concatenate([[0.0], np.cumsum(panel)])
        cum = np.maximum.accumulate(cum / cum[-1])
        interp = PchipInterpolator(edges, np.clip(cum, 0.0, 1.0), extrapolate=False)

        def cdf(x):
            x = np.asarray(x, dtype=float)
            out = interp(np.clip(x, lo, hi))
            return np.where(x <= lo, 0.0, np.where(x >= hi, 1.0, out))

        return cdf

    def grid_supremum(self, n_per_axis=512):
        """Max of the unnormalized density on a tensor grid (envelope estimate)."""
        coeff = _coeff_outer(self.wave)
        bs = []
        for k, (lo, hi) in enumerate(self.windows):
            xs = np.linspace(lo, hi, n_per_axis)
            bs.append(axis_bilinears(self.wave, self.spec, self.t, k, xs, self.rep))
        letters = "xyzw"
        n = self.wave.n_particles
        expr = "ts," + ",".join(f"ts{letters[k]}" for k in range(n)) \
               + "->" + letters[:n]
        grid = np.einsum(expr, coeff, *bs).real
        return float(grid.max())


def density(ld, xs):
    """Normalized joint density of a :class:`LeafDensity` at configurations."""
    return ld.density(np.asarray(xs, dtype=float))


# ---------------------------------------------------------------------------
# sampling


def sample_positions(ld, m, seed, envelope_factor=1.2, max_restarts=3,
                     chunk=65536):
    """Rejection-sample m configurations from a leaf density.

    Uniform box proposals against an envelope 1.2x the grid-estimated
    supremum; any accepted-region density exceeding the envelope triggers
    a full restart with a re-estimated envelope (correctness over speed).
    Deterministic for a given seed.
    """
    if m == 0:
        return np.empty((0, ld.wave.n_particles))
    n = ld.wave.n_particles
    lo = np.array([w[0] for w in ld.windows])
    hi = np.array([w[1] for w in ld.windows])
    grid_n = 512
    for attempt in range(max_restarts + 1):
        env = envelope_factor * ld.grid_supremum(grid_n)
        rng = np.random.default_rng(seed)
        out = []
        got = 0
        ok = True
        while got < m:
            prop = lo + (hi - lo) * rng.random((chunk, n))
            d = density_unnormalized(ld.wave, ld.spec, ld.t, prop, ld.rep)
            if float(d.max()) > env:
                ok = False
                break
            accept = rng.random(chunk) * env < d
            taken = prop[accept]
            out.append(taken)
            got += taken.shape[0]
        if ok:
            return np.concatenate(out, axis=0)[:m]
        grid_n *= 2
        envelope_factor *= 1.1
    raise EnvelopeError(f"envelope violated after {max_restarts} restarts")


def sample(ld, m, seed, **kw):
    """Rejection sampling returning on-leaf :class:`Configuration` objects."""
    ys = sample_positions(ld, m, seed, **kw)
    return [Configuration.on_leaf(ld.spec, ld.t, y) for y in ys]


def _positions_of(samples):
    if isinstance(samples, np.ndarray):
        return np.asarray(samples, dtype=float)
    return np.array([s.x1 for s in samples], dtype=float)


# ---------------------------------------------------------------------------
# transport and comparison


@dataclass
class TransportResult:
    positions: np.ndarray            # (M, N) final; dead samples frozen
    alive: np.ndarray                # (M,) bool
    node_aborts: int
    window_exits: int
    causal_violations: int
    causal_segments: int
    containment_violations: int
    snapshots: dict                  # t -> (M, N) positions
    wall_time: float


def transport(samples, wave, spec, t0, t1, opts=None, rep=DEFAULT_REP,
              watch_region=None, snapshot_times=(), threads=1,
              causal_tol=1e-12):
    """Map the trajectory integrator over an ensemble sampled on leaf t0.

    Counts causal-character violations incrementally, watches an optional
    plateau region (no particle may cross its boundary between the watch
    interval's endpoints), and records position snapshots at the
    requested times.  Node-aborted trajectories are frozen and counted.
    """
    opts = opts or IntegratorOptions()
    ys0 = _positions_of(samples)
    m, n = ys0.shape
    t_start = time.perf_counter()

    if opts.node_scale is None and m > 0:
        # one shared scale so threading/chunking cannot shift node thresholds
        opts = IntegratorOptions(**{**opts.__dict__,
                                    "node_scale": ensemble_density_scale(
                                        wave, spec, t0, ys0, rep=rep)})

    snap_times = sorted(set(float(t) for t in snapshot_times))
    forced = tuple(sorted(set(tuple(opts.forced_times) + tuple(snap_times))))
    opts = IntegratorOptions(**{**opts.__dict__, "forced_times": forced})

    watch = None
    if watch_region is not None:
        (ax_lo, ax_hi), (wt1, wt2) = watch_region
        watch = {"lo": ax_lo, "hi": ax_hi, "t1": wt1, "t2": wt2}

    def run_chunk(ys_chunk):
        counters = {"causal": 0, "segments": 0, "contain": 0}
        snaps = {}
        prev = {"t": None, "x0": None, "x1": None}
        membership = {"start": None}
        violated = np.zeros(ys_chunk.shape, dtype=bool)

        def on_sample(t, ys, v, j, d, alive):
            x0 = np.asarray(spec.f(t, ys), dtype=float)
            if prev["t"] is not None:
                d0 = x0 - prev["x0"]
                d1 = ys - prev["x1"]
                f0, f1 = roundoff_floor(x0, ys)
                tiny = (np.abs(d0) <= f0) & (np.abs(d1) <= f1)
                margin = d0 * d0 - d1 * d1 + causal_tol * d0 * d0
                live = alive[:, None] & ~tiny
                counters["causal"] += int(np.count_nonzero((margin < 0) & live))
                if spec.monotone:
                    bad = (d0 < -causal_tol * np.maximum(np.abs(d0), 1.0)) & live
                    counters["causal"] += int(np.count_nonzero(bad))
                counters["segments"] += int(alive.sum()) * ys.shape[1]
            prev["t"], prev["x0"], prev["x1"] = t, x0, ys.copy()
            for st in snap_times:
                if abs(t - st) < 1e-12:
                    snaps[st] = ys.copy()
            if watch is not None and watch["t1"] - 1e-12 <= t <= watch["t2"] + 1e-12:
                inside = (ys >= watch["lo"]) & (ys <= watch["hi"])
                if membership["start"] is None:
                    membership["start"] = inside.copy()
                else:
                    np.logical_or(violated, inside != membership["start"], out=violated)

        ys_fin, state = integrate_batch(wave, spec, t0, ys_chunk, t1, opts, rep,
                                        on_sample, sample_needs_velocity=False)
        counters["contain"] = int(np.count_nonzero(violated))
        return ys_fin, state, counters, snaps

    if threads <= 1 or m < 2 * threads:
        chunks = [np.arange(m)]
    else:
        chunks = np.array_split(np.arange(m), threads)

    results = [None] * len(chunks)
    if len(chunks) == 1:
        results[0] = run_chunk(ys0)
    else:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=len(chunks)) as ex:
            futs = [ex.submit(run_chunk, ys0[idx]) for idx in chunks]
            results = [f.result() for f in futs]

    ys_out = np.concatenate([r[0] for r in results], axis=0)
    alive = np.concatenate([r[1].alive for r in results])
    status = np.concatenate([r[1].status for r in results])
    snaps = {}
    for st in snap_times:
        parts = [r[3].get(st) for r in results]
        if all(p is not None for p in parts):
            snaps[st] = np.concatenate(parts, axis=0)
    return TransportResult(
        positions=ys_out,
        alive=alive,
        node_aborts=int(np.count_nonzero(status == 1)),
        window_exits=int(np.count_nonzero(status == 2)),
        causal_violations=sum(r[2]["causal"] for r in results),
        causal_segments=sum(r[2]["segments"] for r in results),
        containment_violations=sum(r[2]["contain"] for r in results),
        snapshots=snaps,
        wall_time=time.perf_counter() - t_start,
    )


@dataclass
class CompareResult:
    ks_per_marginal: np.ndarray
    energy: float
    m: int


def compare(ensemble, ld_target, energy_subsample=1024, energy_seed=20260808):
    """Per-particle one-sample KS against the quadrature-integrated marginals.

    Also reports (not gates) the energy distance of the joint sample
    against a fresh draw from the target.
    """
    ys = _positions_of(ensemble)
    m, n = ys.shape
    ks = np.empty(n)
    for k in range(n):
        cdf = ld_target.marginal_cdf(k)
        ks[k] = ks_statistic(ys[:, k], cdf)
    sub = min(energy_subsample, m)
    fresh = sample_positions(ld_target, sub, seed=energy_seed)
    e = energy_distance(ys[:sub], fresh)
    return CompareResult(ks_per_marginal=ks, energy=float(e), m=m)


# ---------------------------------------------------------------------------
# conservation and no-signaling


def total_probability_scan(wave, spec, t_grid, windows, quad_order=12,
                           rep=DEFAULT_REP, x_edges=()):
    """Max relative drift of Z(t) across a parameter grid."""
    zs = np.array([normalize(wave, spec, float(t), windows, quad_order, rep, x_edges)
                   for t in t_grid])
    return float(np.max(np.abs(zs / zs[0] - 1.0))), zs


def no_signaling_marginal(wave, spec, region_a, t_list, probe_points,
                          windows, slot=0, quad_order=12, rep=DEFAULT_REP):
    """Sup relative drift of the in-plateau marginal across leaf parameters.

    The marginal of the probed particle is obtained by integrating every
    partner coordinate over its window (``windows`` indexed by slot; the
    probed slot's entry is unused).  Precondition: every probe must lie
    in a degeneracy region of the foliation for every t in t_list.
    """
    probes = np.asarray(probe_points, dtype=float)
    a_lo, a_hi = region_a
    if np.any(probes < a_lo) or np.any(probes > a_hi):
        raise ValueError("probe points must lie inside the region")
    for t in t_list:
        for x in probes:
            if not degeneracy_at(spec, float(t), float(x)):
                raise ValueError(f"region not degenerate at (t={t}, x={x})")

    coeff = _coeff_outer(wave)
    vals = []
    for t in t_list:
        acc = coeff.copy()
        for j in range(wave.n_particles):
            if j == slot:
                continue
            acc = acc * axis_flux_matrix(wave, spec, float(t), j, windows[j],
                                         rep, quad_order)
        b = axis_bilinears(wave, spec, float(t), slot, probes, rep)
        vals.append(np.einsum("ts,tsx->x", acc, b).real)
    vals = np.stack(vals)
    scale = float(np.max(vals))
    sup = 0.0
    for i in range(len(t_list)):
        for j in range(i + 1, len(t_list)):
            sup = max(sup, float(np.max(np.abs(vals[i] - vals[j]))))
    return sup / scale


# ---------------------------------------------------------------------------
# reporting


@dataclass
class EnsembleReport:
    m: int
    ks_per_marginal: tuple
    total_prob_drift: float
    node_aborts: int
    causal_violations: int
    containment_violations: int
    wall_time: float
    energy_distance: float = float("nan")
    window_exits: int = 0

    def as_text(self):
        lines = [
            f"samples                : {self.m}",
        ]
        for k, v in enumerate(self.ks_per_marginal):
            lines.append(f"ks_marginal_{k}          : {v:.6f}")
        lines += [
            f"total_prob_drift       : {self.total_prob_drift:.3e}",
            f"node_aborts            : {self.node_aborts}",
            f"window_exits           : {self.window_exits}",
            f"causal_violations      : {self.causal_violations}",
            f"containment_violations : {self.containment_violations}",
            f"energy_distance        : {self.energy_distance:.6e}",
            f"wall_time_s            : {self.wall_time:.3f}",
        ]
        return "\n".join(lines) + "\n"

    def csv_header(self):
        # wall_time deliberately omitted: CSV outputs are byte-reproducible
        ks_cols = ",".join(f"ks_{k}" for k in range(len(self.ks_per_marginal)))
        return ("m," + ks_cols + ",total_prob_drift,node_aborts,window_exits,"
                "causal_violations,containment_violations,energy_distance")

    def as_csv_row(self):
        ks = ",".join(f"{v:.9g}" for v in self.ks_per_marginal)
        return (f"{self.m},{ks},{self.total_prob_drift:.9g},{self.node_aborts},"
                f"{self.window_exits},{self.causal_violations},"
                f"{self.containment_violations},{self.energy_distance:.9g}")
