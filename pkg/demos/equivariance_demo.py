"""Monte Carlo check that the dynamics preserves the leaf distribution.

Samples an ensemble from the current-tensor density on the t = -2 leaf,
transports every configuration through the plateau to t = +2, and
compares the transported marginals against the quadrature-integrated
target by one-sample Kolmogorov-Smirnov distances.  Uses a smaller
ensemble than the acceptance suite so it finishes in ~30 s.
"""

import numpy as np

from bohmdirac import dirac, dynamics as dyn, equivariance as eq, foliation as fol

spec = fol.appendix_foliation()
packet = lambda k, x: dirac.gaussian_packet(1.0, k, 1.0, 64, x_center=x)
wave = dirac.MultiTimeWave(
    masses=(1.0, 1.0),
    terms=(
        (0.8, (packet(0.6, -2.2), packet(-0.4, 1.5))),
        (0.55 + 0.25j, (packet(-0.5, -2.3), packet(0.7, 1.3))),
    ),
)
windows = ((-14.0, 14.0), (-14.0, 14.0))
m, seed = 1200, 11

drift, _ = eq.total_probability_scan(wave, spec, np.linspace(-2, 2, 11), windows)
print(f"total probability drift over the scan: {drift:.2e}")

ld0 = eq.LeafDensity(wave, spec, -2.0, windows)
ys = eq.sample_positions(ld0, m, seed)
print(f"sampled {m} configurations on the t=-2 leaf")

res = eq.transport(ys, wave, spec, -2.0, 2.0,
                   dyn.IntegratorOptions(h=0.02, spatial_window=(-14, 14)),
                   watch_region=spec.plateau)
print(f"transported in {res.wall_time:.1f}s: node aborts {res.node_aborts}, "
      f"causal violations {res.causal_violations}, "
      f"containment violations {res.containment_violations}")

ld1 = eq.LeafDensity(wave, spec, 2.0, windows)
comp = eq.compare(res.positions[res.alive], ld1)
crit = eq.ks_critical(m)
for k, v in enumerate(comp.ks_per_marginal):
    verdict = "ok" if v < crit else "SUSPICIOUS"
    print(f"marginal {k}: KS distance {v:.4f} (critical at 1%: {crit:.4f}) {verdict}")
print(f"joint energy-distance diagnostic: {comp.energy:.2e}")
