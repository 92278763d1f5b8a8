"""Tour of the built-in leaf families and their geometry.

Prints validation summaries for every family, demonstrates the matching
between the two labelings of the degenerate family, and writes small SVG
sketches of the leaves and of the configuration-space surface.
"""

import numpy as np

from bohmdirac import foliation as fol
from bohmdirac.svgfig import SvgCanvas, wire_bounds, wireframe

for build in (fol.flat_foliation, fol.appendix_foliation,
              fol.appendix_foliation2, fol.backward_example):
    spec = build()
    window = fol.Window(max(spec.window.t_min, -3.0), min(spec.window.t_max, 3.0),
                        -4.0, 4.0)
    report = fol.validate(spec, grid=(81, 81), window=window)
    print("-" * 60)
    for line in report.lines():
        print(line)

print("-" * 60)
spec_a, spec_b = fol.appendix_foliation(), fol.appendix_foliation2()
for t in (-3.0, -1.0, 0.0, 1.0, 3.0):
    tp, res = fol.reparam_match(spec_a, spec_b, t)
    print(f"leaf at parameter {t:+.1f} of the simple labeling = "
          f"leaf at {tp:+.4f} of the smooth labeling (sup residual {res:.1e})")

# leaves of the degenerate family: the overlap on the left is the plateau
canvas = SvgCanvas((-4, 4), (-2.7, 2.7), title="leaves of the degenerate family")
xs = np.linspace(-4, 4, 321)
for t in np.linspace(-2.2, 2.2, 23):
    canvas.polyline(xs, spec_a.f(t, xs), width=1.0)
canvas.axes(xlabel="x1", ylabel="x0")
canvas.save("foliation_leaves.svg")

# configuration-space surface at two partner positions: smooth on the left
# of the partner axis, folded on the right
for x2 in (-2.0, 3.0):
    mesh = fol.surface_c_mesh(spec_b, x2)
    t1 = mesh.x0_1
    x1 = np.broadcast_to(mesh.x1_vals, t1.shape)
    x02 = np.broadcast_to(mesh.x0_2[:, None], t1.shape)
    (ulo, uhi), (vlo, vhi) = wire_bounds(x1, t1, x02)
    canvas = SvgCanvas((ulo, uhi), (vlo, vhi),
                       title=f"configuration surface, partner at {x2:+g}")
    wireframe(canvas, x1, t1, x02)
    canvas.axes(xlabel="x1_1 (depth: x0_2)", ylabel="x0_1")
    canvas.save(f"surface_c_{x2:+.0f}.svg")
print("wrote foliation_leaves.svg, surface_c_-2.svg, surface_c_+3.svg")
