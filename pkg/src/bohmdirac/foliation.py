"""Families of spacelike leaves x0 = f(t, x1) in 1+1 Minkowski space-time.

Conventions used throughout the package:

* metric is diag(+1, -1), natural units c = hbar = 1;
* a leaf family is described by a function f(t, x) together with its
  partial derivatives f_t and f_x, valid on a rectangular window;
* leaves must be spacelike-or-null, |f_x| <= 1, with equality tolerated
  only at isolated points;
* the family is allowed to be *degenerate*: f may be constant in t on a
  plateau (a region where f_t = 0), so distinct parameter values share a
  piece of hypersurface.  It may also be non-monotone in t (leaves moving
  toward the past in some regions), flagged by ``monotone=False``.

All geometric quantities are routed through the coordinate-scaled
covector m = (1, -f_x) rather than the unit normal n = m / sqrt(1-f_x^2),
so that isolated null points (|f_x| = 1) stay finite.  The unit frame is
available from :func:`normal_frame` wherever it exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NoMatch, NullLeafPoint

HALF_PI = math.pi / 2.0

#: |f_t| at or below this counts as a degeneracy (frozen leaf point).
EPS_DEG = 1e-12

#: 1 - |f_x| at or below this makes the unit normal numerically undefined.
EPS_NULL = 1e-8


def _as_float_array(x):
    return np.asarray(x, dtype=float)


def _scalar_or_array(a):
    a = np.asarray(a)
    return a[()] if a.ndim == 0 else a


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class Event:
    """A space-time point (x0, x1)."""

    x0: float
    x1: float

    def as_array(self):
        return np.array([self.x0, self.x1], dtype=float)


@dataclass(frozen=True)
class Window:
    """Rectangle of validity [t_min, t_max] x [x_min, x_max]."""

    t_min: float
    t_max: float
    x_min: float
    x_max: float

    def contains(self, t, x):
        return (self.t_min <= t <= self.t_max) and (self.x_min <= x <= self.x_max)

    def contains_t(self, t):
        return self.t_min <= t <= self.t_max


@dataclass
class FoliationSpec:
    """A leaf family via f(t, x) with analytic (or supplied) derivatives.

    ``t_breakpoints`` lists parameter values where f is continuous but not
    smooth in t; the trajectory integrator never steps across them.
    ``freeze_times`` lists the endpoints of global plateau intervals, used
    to align integration steps with freeze onsets.  ``plateau``, when set,
    is ((x_lo, x_hi), (t1, t2)): the x-region frozen throughout that
    t-interval (region A of the degenerate family).
    """

    name: str
    f: Callable
    f_t: Callable
    f_x: Callable
    window: Window
    t_breakpoints: tuple = ()
    monotone: bool = True
    freeze_times: tuple = ()
    plateau: tuple | None = None

    def leaf(self, t, x):
        return self.f(t, x)


@dataclass(frozen=True)
class NormalFrame:
    """Normal data of one leaf point.

    ``m_cov`` = (1, -f_x) is always defined; the unit fields are None when
    the point is null to within EPS_NULL.
    """

    m_cov: np.ndarray
    sqrt_h: float
    n_cov: np.ndarray | None
    n_vec: np.ndarray | None


@dataclass(frozen=True)
class DegeneracyRegion:
    """A t-interval and x-intervals on which f_t vanishes throughout."""

    t_interval: tuple
    x_intervals: tuple  # of (x_lo, x_hi) pairs

    def contains(self, t, x):
        if not (self.t_interval[0] <= t <= self.t_interval[1]):
            return False
        return any(lo <= x <= hi for lo, hi in self.x_intervals)


# ---------------------------------------------------------------------------
# the saturating profile g and the two built-in degenerate families


def g_profile(x):
    """Smooth monotone profile: -1 for x <= -pi/2, tanh(tan(x)) inside, +1 above.

    dg/dx <= 1 everywhere, with equality only at x = 0.
    """
    x = _as_float_array(x)
    inner = (x > -HALF_PI) & (x < HALF_PI)
    xi = np.where(inner, x, 0.0)
    out = np.where(x <= -HALF_PI, -1.0, 1.0)
    out = np.where(inner, np.tanh(np.tan(xi)), out)
    return _scalar_or_array(out)


def g_profile_prime(x):
    """Derivative of :func:`g_profile`; identically 0 outside (-pi/2, pi/2)."""
    x = _as_float_array(x)
    inner = (x > -HALF_PI) & (x < HALF_PI)
    xi = np.where(inner, x, 0.0)
    tn = np.tan(xi)
    val = (1.0 - np.tanh(tn) ** 2) * (1.0 + tn * tn)
    out = np.where(inner, val, 0.0)
    return _scalar_or_array(out)


def _branches(t, a):
    t = _as_float_array(t)
    lo = t < -a
    hi = t > a
    mid = ~(lo | hi)
    return t, lo, mid, hi


def appendix_f(t, x):
    """Smooth degenerate leaf family with plateau f = 0 on x <= -pi/2, |t| <= pi/2."""
    a = HALF_PI
    t, lo, mid, hi = _branches(t, a)
    x = _as_float_array(x)
    t, x = np.broadcast_arrays(t, x)
    lo = np.broadcast_to(lo, t.shape)
    mid = np.broadcast_to(mid, t.shape)
    hi = np.broadcast_to(hi, t.shape)
    gx = g_profile(x)
    out = np.empty(t.shape, dtype=float)
    out[lo] = (t[lo] + a) * 0.5 * (1.0 - g_profile(t[lo] + 2 * a)) - 1.0 - gx[lo]
    out[mid] = g_profile(t[mid]) * (1.0 + gx[mid])
    out[hi] = (t[hi] - a) * 0.5 * (1.0 + g_profile(t[hi] - 2 * a)) + 1.0 + gx[hi]
    return _scalar_or_array(out)


def appendix_f_t(t, x):
    a = HALF_PI
    t, lo, mid, hi = _branches(t, a)
    x = _as_float_array(x)
    t, x = np.broadcast_arrays(t, x)
    lo = np.broadcast_to(lo, t.shape)
    mid = np.broadcast_to(mid, t.shape)
    hi = np.broadcast_to(hi, t.shape)
    out = np.empty(t.shape, dtype=float)
    out[lo] = 0.5 * (1.0 - g_profile(t[lo] + 2 * a)) - (t[lo] + a) * 0.5 * g_profile_prime(t[lo] + 2 * a)
    out[mid] = g_profile_prime(t[mid]) * (1.0 + g_profile(x[mid]))
    out[hi] = 0.5 * (1.0 + g_profile(t[hi] - 2 * a)) + (t[hi] - a) * 0.5 * g_profile_prime(t[hi] - 2 * a)
    return _scalar_or_array(out)


def appendix_f_x(t, x):
    a = HALF_PI
    t, lo, mid, hi = _branches(t, a)
    x = _as_float_array(x)
    t, x = np.broadcast_arrays(t, x)
    lo = np.broadcast_to(lo, t.shape)
    mid = np.broadcast_to(mid, t.shape)
    hi = np.broadcast_to(hi, t.shape)
    gpx = g_profile_prime(x)
    out = np.empty(t.shape, dtype=float)
    out[lo] = -gpx[lo]
    out[mid] = g_profile(t[mid]) * gpx[mid]
    out[hi] = gpx[hi]
    return _scalar_or_array(out)


def appendix_f2(t, x):
    """Same leaf family as :func:`appendix_f`, labeled so that f2(t, x) = t for x > pi/2.

    Simpler formula but only piecewise smooth in t (kinks at t = +-2).
    """
    t, lo, mid, hi = _branches(t, 2.0)
    x = _as_float_array(x)
    t, x = np.broadcast_arrays(t, x)
    lo = np.broadcast_to(lo, t.shape)
    mid = np.broadcast_to(mid, t.shape)
    hi = np.broadcast_to(hi, t.shape)
    gx = g_profile(x)
    out = np.empty(t.shape, dtype=float)
    out[lo] = t[lo] + 1.0 - gx[lo]
    out[mid] = 0.5 * t[mid] * (1.0 + gx[mid])
    out[hi] = t[hi] - 1.0 + gx[hi]
    return _scalar_or_array(out)


def appendix_f2_t(t, x):
    t, lo, mid, hi = _branches(t, 2.0)
    x = _as_float_array(x)
    t, x = np.broadcast_arrays(t, x)
    mid = np.broadcast_to(mid, t.shape)
    out = np.ones(t.shape, dtype=float)
    out[mid] = 0.5 * (1.0 + g_profile(x[mid]))
    return _scalar_or_array(out)


def appendix_f2_x(t, x):
    t, lo, mid, hi = _branches(t, 2.0)
    x = _as_float_array(x)
    t, x = np.broadcast_arrays(t, x)
    lo = np.broadcast_to(lo, t.shape)
    mid = np.broadcast_to(mid, t.shape)
    hi = np.broadcast_to(hi, t.shape)
    gpx = g_profile_prime(x)
    out = np.empty(t.shape, dtype=float)
    out[lo] = -gpx[lo]
    out[mid] = 0.5 * t[mid] * gpx[mid]
    out[hi] = gpx[hi]
    return _scalar_or_array(out)


# ---------------------------------------------------------------------------
# built-in specs


def flat_foliation():
    """Constant-time leaves x0 = t."""

    def f(t, x):
        t, x = np.broadcast_arrays(_as_float_array(t), _as_float_array(x))
        return _scalar_or_array(t.copy())

    def f_t(t, x):
        t, x = np.broadcast_arrays(_as_float_array(t), _as_float_array(x))
        return _scalar_or_array(np.ones(t.shape))

    def f_x(t, x):
        t, x = np.broadcast_arrays(_as_float_array(t), _as_float_array(x))
        return _scalar_or_array(np.zeros(t.shape))

    return FoliationSpec(
        name="flat",
        f=f,
        f_t=f_t,
        f_x=f_x,
        window=Window(-100.0, 100.0, -1000.0, 1000.0),
    )


def appendix_foliation():
    """The smooth degenerate family (plateau x <= -pi/2 frozen for |t| <= pi/2)."""
    return FoliationSpec(
        name="appendix_f",
        f=appendix_f,
        f_t=appendix_f_t,
        f_x=appendix_f_x,
        window=Window(-4.0, 4.0, -30.0, 30.0),
        freeze_times=(-HALF_PI, HALF_PI),
        plateau=((-math.inf, -HALF_PI), (-HALF_PI, HALF_PI)),
    )


def appendix_foliation2():
    """The same family with the simpler, non-smooth parameterization."""
    return FoliationSpec(
        name="appendix_f2",
        f=appendix_f2,
        f_t=appendix_f2_t,
        f_x=appendix_f2_x,
        window=Window(-4.0, 4.0, -30.0, 30.0),
        t_breakpoints=(-2.0, 2.0),
        freeze_times=(-2.0, 2.0),
        plateau=((-math.inf, -HALF_PI), (-2.0, 2.0)),
    )


def backward_example():
    """Leaves f(t, x) = t*g(x): move to the future on the right, the past on the left.

    Spacelike for |t| <= 0.9 since |f_x| = |t| g'(x) <= 0.9.  Not monotone.
    """

    def f(t, x):
        t, x = np.broadcast_arrays(_as_float_array(t), _as_float_array(x))
        return _scalar_or_array(t * g_profile(x))

    def f_t(t, x):
        t, x = np.broadcast_arrays(_as_float_array(t), _as_float_array(x))
        return _scalar_or_array(np.broadcast_to(g_profile(x), t.shape).copy())

    def f_x(t, x):
        t, x = np.broadcast_arrays(_as_float_array(t), _as_float_array(x))
        return _scalar_or_array(t * g_profile_prime(x))

    return FoliationSpec(
        name="backward",
        f=f,
        f_t=f_t,
        f_x=f_x,
        window=Window(-0.9, 0.9, -30.0, 30.0),
        monotone=False,
    )


def from_function(name, f, window, f_t=None, f_x=None, fd_step=1e-6,
                  t_breakpoints=(), monotone=True, freeze_times=()):
    """Wrap a user-supplied f; missing derivatives fall back to central differences."""
    if f_t is None:
        def f_t(t, x, _f=f, _h=fd_step):
            return (_f(t + _h, x) - _f(t - _h, x)) / (2.0 * _h)
    if f_x is None:
        def f_x(t, x, _f=f, _h=fd_step):
            return (_f(t, x + _h) - _f(t, x - _h)) / (2.0 * _h)
    return FoliationSpec(name=name, f=f, f_t=f_t, f_x=f_x, window=window,
                         t_breakpoints=tuple(t_breakpoints), monotone=monotone,
                         freeze_times=tuple(freeze_times))


def tabulated_foliation(t_grid, x_grid, values, monotone=True):
    """Foliation interpolated from a table of f values on a (t, x) grid.

    Bicubic spline through the table (linear for tiny tables); the
    partial derivatives come from the spline itself.
    """
    from scipy.interpolate import RectBivariateSpline

    t_grid = np.asarray(t_grid, dtype=float)
    x_grid = np.asarray(x_grid, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.shape != (t_grid.size, x_grid.size):
        raise ValueError("values must have shape (len(t_grid), len(x_grid))")
    k = 3 if (t_grid.size >= 4 and x_grid.size >= 4) else 1
    sp = RectBivariateSpline(t_grid, x_grid, values, kx=k, ky=k, s=0)

    def make(dt, dx):
        def fn(t, x, _sp=sp, _dt=dt, _dx=dx):
            t, x = np.broadcast_arrays(_as_float_array(t), _as_float_array(x))
            out = _sp.ev(t.ravel(), x.ravel(), dx=_dt, dy=_dx).reshape(t.shape)
            return _scalar_or_array(out)
        return fn

    win = Window(float(t_grid[0]), float(t_grid[-1]),
                 float(x_grid[0]), float(x_grid[-1]))
    return FoliationSpec(name="custom-tabulated", f=make(0, 0), f_t=make(1, 0),
                         f_x=make(0, 1), window=win, monotone=monotone)


BUILTIN_FOLIATIONS = {
    "flat": flat_foliation,
    "appendix_f": appendix_foliation,
    "appendix_f2": appendix_foliation2,
    "backward": backward_example,
}


# ---------------------------------------------------------------------------
# geometry


def normal_frame(spec, t, x, eps_null=EPS_NULL, allow_null=False):
    """Normal covector data of the leaf point (f(t,x), x).

    Raises :class:`NullLeafPoint` when |f_x| > 1 - eps_null, unless
    ``allow_null`` is set, in which case the unit fields are None.
    """
    fx = float(spec.f_x(t, x))
    m_cov = np.array([1.0, -fx])
    h2 = 1.0 - fx * fx
    if abs(fx) > 1.0 - eps_null:
        if not allow_null:
            raise NullLeafPoint(f"|f_x| = {abs(fx)} at (t={t}, x={x})")
        return NormalFrame(m_cov=m_cov, sqrt_h=math.sqrt(max(h2, 0.0)),
                           n_cov=None, n_vec=None)
    sqrt_h = math.sqrt(h2)
    n_cov = m_cov / sqrt_h
    n_vec = np.array([n_cov[0], -n_cov[1]])  # raise with diag(+1, -1)
    return NormalFrame(m_cov=m_cov, sqrt_h=sqrt_h, n_cov=n_cov, n_vec=n_vec)


def degeneracy_at(spec, t, x, eps_deg=EPS_DEG):
    """True iff the leaf family is frozen at (t, x): |f_t| <= eps_deg."""
    return bool(np.abs(spec.f_t(t, x)) <= eps_deg)


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    name: str
    t_grid: np.ndarray
    x_grid: np.ndarray
    max_abs_fx: float
    max_abs_fx_at: tuple
    min_ft: float
    min_ft_at: tuple
    spacelike_violations: int
    monotone_claimed: bool
    monotone_violations: int
    degenerate_mask: np.ndarray = field(repr=False)
    regions: list = field(default_factory=list)
    breakpoint_residuals: dict = field(default_factory=dict)

    @property
    def spacelike_ok(self):
        return self.spacelike_violations == 0

    @property
    def monotone_ok(self):
        return (not self.monotone_claimed) or self.monotone_violations == 0

    @property
    def continuous_ok(self):
        return all(r < 1e-6 for r in self.breakpoint_residuals.values())

    @property
    def ok(self):
        return self.spacelike_ok and self.monotone_ok and self.continuous_ok

    def lines(self):
        yield f"foliation           : {self.name}"
        yield f"grid                : {len(self.t_grid)} x {len(self.x_grid)}"
        yield f"max |f_x|           : {self.max_abs_fx:.6g} at (t,x)={self.max_abs_fx_at}"
        yield f"min f_t             : {self.min_ft:.6g} at (t,x)={self.min_ft_at}"
        yield f"spacelike violations: {self.spacelike_violations}"
        yield f"monotone claimed    : {self.monotone_claimed}"
        yield f"monotone violations : {self.monotone_violations}"
        yield f"degenerate fraction : {self.degenerate_mask.mean():.4f}"
        for i, reg in enumerate(self.regions):
            xs = ", ".join(f"[{lo:.4g}, {hi:.4g}]" for lo, hi in reg.x_intervals)
            yield (f"degeneracy region {i}: t in [{reg.t_interval[0]:.4g}, "
                   f"{reg.t_interval[1]:.4g}], x in {xs}")
        for tb, r in self.breakpoint_residuals.items():
            yield f"continuity at t={tb:g}: residual {r:.3e}"
        yield f"verdict             : {'PASS' if self.ok else 'FAIL'}"


def _connected_components(mask):
    """4-connected components of a boolean grid; returns a label array."""
    labels = np.full(mask.shape, -1, dtype=int)
    current = 0
    nt, nx = mask.shape
    for i0 in range(nt):
        for j0 in range(nx):
            if not mask[i0, j0] or labels[i0, j0] >= 0:
                continue
            stack = [(i0, j0)]
            labels[i0, j0] = current
            while stack:
                i, j = stack.pop()
                for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    ii, jj = i + di, j + dj
                    if 0 <= ii < nt and 0 <= jj < nx and mask[ii, jj] and labels[ii, jj] < 0:
                        labels[ii, jj] = current
                        stack.append((ii, jj))
            current += 1
    return labels, current


def _x_runs(cols, x_grid):
    """Group sorted column indices into contiguous (x_lo, x_hi) intervals."""
    runs = []
    start = prev = cols[0]
    for j in cols[1:]:
        if j == prev + 1:
            prev = j
            continue
        runs.append((x_grid[start], x_grid[prev]))
        start = prev = j
    runs.append((x_grid[start], x_grid[prev]))
    return tuple(runs)


def extract_degeneracy_regions(t_grid, x_grid, mask, min_t_span=0.0):
    """Maximal-rectangle summaries of a degeneracy mask.

    Each connected component yields its t-extent together with the x
    columns that are degenerate throughout that extent, matching the
    "f_t = 0 on t_interval x x_interval" reading.
    """
    labels, n = _connected_components(mask)
    regions = []
    for c in range(n):
        rows, cols = np.nonzero(labels == c)
        i_lo, i_hi = rows.min(), rows.max()
        if t_grid[i_hi] - t_grid[i_lo] < min_t_span:
            continue
        sub = mask[i_lo:i_hi + 1, :]
        always = np.nonzero(sub.all(axis=0))[0]
        if always.size == 0:
            continue
        regions.append(DegeneracyRegion(
            t_interval=(float(t_grid[i_lo]), float(t_grid[i_hi])),
            x_intervals=_x_runs(list(always), x_grid),
        ))
    regions.sort(key=lambda r: -(r.t_interval[1] - r.t_interval[0]))
    return regions


def validate(spec, grid=(121, 121), eps_deg=EPS_DEG, window=None):
    """Sample-based checks of spacelikeness, monotonicity and degeneracy."""
    win = window or spec.window
    nt, nx = grid
    t_grid = np.linspace(win.t_min, win.t_max, nt)
    x_grid = np.linspace(win.x_min, win.x_max, nx)
    T, X = np.meshgrid(t_grid, x_grid, indexing="ij")
    fx = np.asarray(spec.f_x(T, X), dtype=float)
    ft = np.asarray(spec.f_t(T, X), dtype=float)

    abs_fx = np.abs(fx)
    imax = np.unravel_index(np.argmax(abs_fx), abs_fx.shape)
    imin = np.unravel_index(np.argmin(ft), ft.shape)

    report = ValidationReport(
        name=spec.name,
        t_grid=t_grid,
        x_grid=x_grid,
        max_abs_fx=float(abs_fx[imax]),
        max_abs_fx_at=(float(T[imax]), float(X[imax])),
        min_ft=float(ft[imin]),
        min_ft_at=(float(T[imin]), float(X[imin])),
        spacelike_violations=int(np.count_nonzero(abs_fx > 1.0 + 1e-12)),
        monotone_claimed=spec.monotone,
        monotone_violations=int(np.count_nonzero(ft < -eps_deg)) if spec.monotone else 0,
        degenerate_mask=np.abs(ft) <= eps_deg,
    )
    report.regions = extract_degeneracy_regions(t_grid, x_grid, report.degenerate_mask)
    delta = 1e-7
    for tb in spec.t_breakpoints:
        if not (win.t_min < tb < win.t_max):
            continue
        r = np.max(np.abs(spec.f(tb - delta, x_grid) - spec.f(tb + delta, x_grid)))
        report.breakpoint_residuals[float(tb)] = float(r)
    return report


# ---------------------------------------------------------------------------
# reparametrization matching and the configuration-space surface


def reparam_match(spec_a, spec_b, t, search_interval=None, tol=1e-6,
                  n_scan=401, n_x=241):
    """Find the parameter t' of spec_a whose leaf matches spec_b's leaf at t.

    Minimizes sup_x |spec_a.f(t', x) - spec_b.f(t, x)| over a sampling
    grid by coarse scan plus bounded 1-d refinement.  Returns
    ``(t_prime, sup_residual)``; raises :class:`NoMatch` if the
    minimized sup exceeds ``tol``.
    """
    if search_interval is None:
        search_interval = (spec_a.window.t_min, spec_a.window.t_max)
    lo, hi = map(float, search_interval)
    x_lo = max(spec_a.window.x_min, spec_b.window.x_min)
    x_hi = min(spec_a.window.x_max, spec_b.window.x_max)
    xs = np.linspace(x_lo, x_hi, n_x)
    target = np.asarray(spec_b.f(t, xs), dtype=float)

    def residual(tp):
        return float(np.max(np.abs(np.asarray(spec_a.f(tp, xs), dtype=float) - target)))

    scan = np.linspace(lo, hi, n_scan)
    vals = [residual(tp) for tp in scan]
    ib = int(np.argmin(vals))
    step = (hi - lo) / (n_scan - 1)
    # golden-section refinement: robust for the V-shaped minima these
    # sup-residuals typically have, where parabolic steps stall early
    a = max(lo, scan[ib] - 2 * step)
    b = min(hi, scan[ib] + 2 * step)
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = residual(c), residual(d)
    while b - a > 1e-13:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = residual(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = residual(d)
    t_prime = 0.5 * (a + b)
    sup_res = residual(t_prime)
    if vals[ib] < sup_res:
        t_prime, sup_res = float(scan[ib]), float(vals[ib])
    if sup_res > tol:
        raise NoMatch(f"best sup-residual {sup_res:.3e} at t'={t_prime:.6g} exceeds {tol:g}")
    return float(t_prime), float(sup_res)


@dataclass
class SurfaceMesh:
    """The 2-surface {(f(t,x1), x1, f(t,x2_fixed))} of configuration space.

    Embedded in the three coordinates (x0_1, x1_1, x0_2); the x1_2
    coordinate is held fixed.
    """

    x2_fixed: float
    t_vals: np.ndarray
    x1_vals: np.ndarray
    x0_1: np.ndarray  # shape (nt, nx)
    x0_2: np.ndarray  # shape (nt,)

    def rows(self):
        for i, t in enumerate(self.t_vals):
            for j, x1 in enumerate(self.x1_vals):
                yield (float(t), float(x1), float(self.x0_1[i, j]), float(self.x0_2[i]))


def surface_c_mesh(spec, x2_fixed, t_vals=None, x1_vals=None, grid=(41, 81)):
    """Mesh of the configuration-space surface at fixed partner position."""
    if t_vals is None:
        t_vals = np.linspace(spec.window.t_min, spec.window.t_max, grid[0])
    if x1_vals is None:
        x1_vals = np.linspace(max(spec.window.x_min, -4.0),
                              min(spec.window.x_max, 4.0), grid[1])
    t_vals = np.asarray(t_vals, dtype=float)
    x1_vals = np.asarray(x1_vals, dtype=float)
    T, X = np.meshgrid(t_vals, x1_vals, indexing="ij")
    x0_1 = np.asarray(spec.f(T, X), dtype=float)
    x0_2 = np.asarray(spec.f(t_vals, np.full_like(t_vals, x2_fixed)), dtype=float)
    return SurfaceMesh(x2_fixed=float(x2_fixed), t_vals=t_vals, x1_vals=x1_vals,
                       x0_1=x0_1, x0_2=x0_2)
