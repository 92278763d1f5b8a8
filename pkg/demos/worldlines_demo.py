"""World lines on a degenerate leaf family, kinks included.

Integrates a handful of two-particle trajectories for an entangled state:
the left particle sits in the frozen region (x < -pi/2) and stops moving
while the leaves there overlap; its direction generally changes across
the freeze (a kink), unless the state is a product.  Writes an SVG next
to this script.
"""

import numpy as np

from bohmdirac import dirac, dynamics as dyn, foliation as fol
from bohmdirac.svgfig import SvgCanvas

spec = fol.appendix_foliation()

packet = lambda k, x: dirac.gaussian_packet(1.0, k, 1.0, 64, x_center=x)
wave = dirac.MultiTimeWave(
    masses=(1.0, 1.0),
    terms=(
        (0.8, (packet(0.6, -2.2), packet(-0.4, 1.5))),
        (0.55 + 0.25j, (packet(-0.5, -2.3), packet(0.7, 1.3))),
    ),
)

initials = [[-2.6, 0.8], [-2.2, 1.4], [-1.9, 2.0], [0.6, 1.2], [1.0, -0.5]]
opts = dyn.IntegratorOptions(h=0.02)

trajs = dyn.integrate_trajectories(wave, spec, -2.0, np.array(initials), 2.0, opts)
for traj in trajs:
    kinks = dyn.detect_kinks(traj, spec)
    for k in kinks:
        print(f"kink: particle {k.particle} frozen on t in "
              f"[{k.t_enter:.3f}, {k.t_exit:.3f}], direction angle {k.angle:.4f} rad")

canvas = SvgCanvas((-4, 4), (-2.6, 2.6), title="Bohmian world lines across a plateau")
xs = np.linspace(-4, 4, 241)
for t in np.linspace(-2, 2, 17):
    canvas.polyline(xs, spec.f(t, xs), stroke="#bbb", width=0.6)
colors = ("#1f4e8c", "#b2382b", "#2d7a3a", "#7a4ba0", "#b07020")
for i, traj in enumerate(trajs):
    for k in range(2):
        canvas.polyline(traj.x1[:, k], traj.x0[:, k], stroke=colors[i % 5], width=1.8)
    for kink in traj.kinks:
        idx = int(np.argmin(np.abs(traj.ts - kink.t_enter)))
        canvas.circle(traj.x1[idx, kink.particle], traj.x0[idx, kink.particle], 4.0)
canvas.axes(xlabel="x1", ylabel="x0")
canvas.save("worldlines_demo.svg")
print("wrote worldlines_demo.svg")
