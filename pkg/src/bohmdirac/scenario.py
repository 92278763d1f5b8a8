"""Scenario files: one TOML document describes a full reproducible run.

See docs/scenario-format.md for the schema and scenarios/ for three
annotated examples.  Every field a command needs is resolved here, so the
CLI layer stays a thin dispatcher.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

from .dirac import MultiTimeWave, gaussian_packet
from .dynamics import IntegratorOptions
from .errors import ScenarioError
from .foliation import BUILTIN_FOLIATIONS, tabulated_foliation


DEFAULT_GATES = {
    "ks": 0.03,
    "node_fraction": 0.001,
    "drift": 1e-4,
    "causal": 0,
    "containment": 0,
}


@dataclass
class Scenario:
    title: str
    foliation: object
    wave: MultiTimeWave
    windows: tuple            # ((lo, hi), ...) one per particle
    m: int
    seed: int
    t0: float
    t1: float
    integrator: IntegratorOptions
    gates: dict
    worldline_initials: tuple = ()
    outputs_dir: str = "out"
    raw: dict = field(default_factory=dict, repr=False)


def _require(table, key, where):
    if key not in table:
        raise ScenarioError(f"missing '{key}' in [{where}]")
    return table[key]


def build_foliation(cfg):
    name = _require(cfg, "name", "foliation")
    if name in BUILTIN_FOLIATIONS:
        return BUILTIN_FOLIATIONS[name]()
    if name == "custom-tabulated":
        try:
            return tabulated_foliation(
                t_grid=np.asarray(_require(cfg, "t_grid", "foliation"), dtype=float),
                x_grid=np.asarray(_require(cfg, "x_grid", "foliation"), dtype=float),
                values=np.asarray(_require(cfg, "values", "foliation"), dtype=float),
                monotone=bool(cfg.get("monotone", True)),
            )
        except ValueError as exc:
            raise ScenarioError(str(exc)) from exc
    known = sorted(BUILTIN_FOLIATIONS) + ["custom-tabulated"]
    raise ScenarioError(f"unknown foliation '{name}'; known: {', '.join(known)}")


def _complex_of(val, where):
    if isinstance(val, (int, float)):
        return complex(val)
    if isinstance(val, (list, tuple)) and len(val) == 2:
        return complex(float(val[0]), float(val[1]))
    raise ScenarioError(f"coefficient in [{where}] must be a number or [re, im]")


def build_wave(cfg):
    masses = [float(m) for m in _require(cfg, "masses", "wave")]
    terms = []
    for i, term in enumerate(_require(cfg, "terms", "wave")):
        coeff = _complex_of(_require(term, "coeff", f"wave.terms[{i}]"), "wave.terms")
        factors = []
        for j, fac in enumerate(_require(term, "factors", f"wave.terms[{i}]")):
            if j >= len(masses):
                raise ScenarioError(f"term {i} has more factors than masses")
            factors.append(gaussian_packet(
                m=masses[j],
                k_center=float(fac.get("k_center", 0.0)),
                spread=float(fac.get("spread", 1.0)),
                n_modes=int(fac.get("n_modes", 64)),
                k_window=float(fac["k_window"]) if "k_window" in fac else None,
                x_center=float(fac.get("x_center", 0.0)),
            ))
        if len(factors) != len(masses):
            raise ScenarioError(f"term {i} has {len(factors)} factors, need {len(masses)}")
        terms.append((coeff, tuple(factors)))
    return MultiTimeWave(masses=tuple(masses), terms=tuple(terms))


def load_scenario(path):
    path = Path(path)
    if not path.exists():
        raise ScenarioError(f"scenario file not found: {path}")
    try:
        raw = _toml.loads(path.read_text())
    except _toml.TOMLDecodeError as exc:
        raise ScenarioError(f"cannot parse {path}: {exc}") from exc

    spec = build_foliation(raw.get("foliation", {}))
    wave = build_wave(raw.get("wave", {}))

    wcfg = raw.get("windows", {})
    windows = tuple((float(a), float(b)) for a, b in
                    _require(wcfg, "x", "windows"))
    if len(windows) != wave.n_particles:
        raise ScenarioError(f"{len(windows)} windows for {wave.n_particles} particles")
    for lo, hi in windows:
        if not (spec.window.x_min <= lo < hi <= spec.window.x_max):
            raise ScenarioError(
                f"window [{lo}, {hi}] outside foliation validity "
                f"[{spec.window.x_min}, {spec.window.x_max}]")

    ens = raw.get("ensemble", {})
    m = int(ens.get("m", 0))
    seed = int(ens.get("seed", 0))
    t0 = float(_require(ens, "t0", "ensemble"))
    t1 = float(_require(ens, "t1", "ensemble"))
    for t in (t0, t1):
        if not spec.window.contains_t(t):
            raise ScenarioError(f"t={t} outside foliation validity "
                                f"[{spec.window.t_min}, {spec.window.t_max}]")

    icfg = raw.get("integrator", {})
    x_lo = min(w[0] for w in windows)
    x_hi = max(w[1] for w in windows)
    opts = IntegratorOptions(
        h=float(icfg.get("h", 0.02)),
        tol=float(icfg.get("tol", 1e-8)),
        eps_node=float(icfg.get("eps_node", 1e-10)),
        spatial_window=(x_lo, x_hi),
    )

    gates = dict(DEFAULT_GATES)
    gates.update({k: v for k, v in raw.get("gates", {}).items() if k in gates})

    initials = tuple(tuple(float(x) for x in row)
                     for row in raw.get("worldlines", {}).get("initial", ()))
    for row in initials:
        if len(row) != wave.n_particles:
            raise ScenarioError("each worldlines.initial row needs one x per particle")

    return Scenario(
        title=str(raw.get("title", path.stem)),
        foliation=spec,
        wave=wave,
        windows=windows,
        m=m,
        seed=seed,
        t0=t0,
        t1=t1,
        integrator=opts,
        gates=gates,
        worldline_initials=initials,
        outputs_dir=str(raw.get("outputs", {}).get("dir", "out")),
        raw=raw,
    )
