"""Minimal deterministic SVG figures (no plotting dependencies).

Fixed canvas, fixed sampling grids and fixed "%.2f" pixel formatting keep
the output byte-stable across runs; a manifest hash can be embedded as a
comment for provenance.
"""

from __future__ import annotations

import math
import os
import tempfile

import numpy as np


class SvgCanvas:
    """A data-coordinate canvas rendered to a standalone SVG document."""

    def __init__(self, x_range, y_range, width=720, height=480, margin=56,
                 title=""):
        self.x_range = (float(x_range[0]), float(x_range[1]))
        self.y_range = (float(y_range[0]), float(y_range[1]))
        self.width = width
        self.height = height
        self.margin = margin
        self.title = title
        self._parts = []

    # -- coordinate mapping

    def _px(self, x):
        x0, x1 = self.x_range
        return self.margin + (x - x0) / (x1 - x0) * (self.width - 2 * self.margin)

    def _py(self, y):
        y0, y1 = self.y_range
        return self.height - self.margin - (y - y0) / (y1 - y0) * (self.height - 2 * self.margin)

    # -- primitives

    def comment(self, text):
        self._parts.append(f"<!-- {text} -->")

    def polyline(self, xs, ys, stroke="#1f4e8c", width=1.5, dash=None, opacity=1.0):
        pts = " ".join(f"{self._px(x):.2f},{self._py(y):.2f}"
                       for x, y in zip(np.asarray(xs, float), np.asarray(ys, float)))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        op_attr = f' stroke-opacity="{opacity:.2f}"' if opacity != 1.0 else ""
        self._parts.append(
            f'<polyline fill="none" stroke="{stroke}" stroke-width="{width:.2f}"'
            f'{dash_attr}{op_attr} points="{pts}"/>')

    def circle(self, x, y, r=3.0, fill="#c22", stroke="none"):
        self._parts.append(
            f'<circle cx="{self._px(x):.2f}" cy="{self._py(y):.2f}" r="{r:.2f}" '
            f'fill="{fill}" stroke="{stroke}"/>')

    def text(self, x_px, y_px, s, size=12, anchor="middle", color="#222"):
        self._parts.append(
            f'<text x="{x_px:.2f}" y="{y_px:.2f}" font-size="{size}" '
            f'font-family="sans-serif" text-anchor="{anchor}" fill="{color}">{s}</text>')

    def axes(self, xlabel="", ylabel="", n_ticks=5):
        x0, x1 = self.x_range
        y0, y1 = self.y_range
        left, right = self._px(x0), self._px(x1)
        top, bottom = self._py(y1), self._py(y0)
        self._parts.append(
            f'<rect x="{left:.2f}" y="{top:.2f}" width="{right - left:.2f}" '
            f'height="{bottom - top:.2f}" fill="none" stroke="#888" stroke-width="1"/>')
        for xv in np.linspace(x0, x1, n_ticks):
            px = self._px(xv)
            self._parts.append(f'<line x1="{px:.2f}" y1="{bottom:.2f}" x2="{px:.2f}" '
                               f'y2="{bottom + 5:.2f}" stroke="#888"/>')
            self.text(px, bottom + 18, f"{xv:g}", size=10)
        for yv in np.linspace(y0, y1, n_ticks):
            py = self._py(yv)
            self._parts.append(f'<line x1="{left - 5:.2f}" y1="{py:.2f}" x2="{left:.2f}" '
                               f'y2="{py:.2f}" stroke="#888"/>')
            self.text(left - 9, py + 3, f"{yv:g}", size=10, anchor="end")
        if xlabel:
            self.text(0.5 * (left + right), self.height - 12, xlabel)
        if ylabel:
            self.text(16, top - 8, ylabel, anchor="start")
        if self.title:
            self.text(0.5 * (left + right), 22, self.title, size=14)

    def to_string(self):
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
                f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">')
        body = "\n".join(self._parts)
        return head + "\n" + body + "\n</svg>\n"

    def save(self, path):
        write_atomic(path, self.to_string())


def write_atomic(path, text):
    """Write via temp file + rename so partial files never appear."""
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp_", suffix=".part")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def project_oblique(a, b, c, angle_deg=30.0, depth=0.45):
    """Oblique projection of (a, b, c) data triples onto the page plane.

    ``a`` runs right, ``b`` up; ``c`` recedes at ``angle_deg``.
    """
    th = math.radians(angle_deg)
    u = np.asarray(a, float) + depth * math.cos(th) * np.asarray(c, float)
    v = np.asarray(b, float) + depth * math.sin(th) * np.asarray(c, float)
    return u, v


def wireframe(canvas, a_grid, b_grid, c_grid, stroke="#1f4e8c", width=0.8,
              angle_deg=30.0, depth=0.45, stride=1):
    """Draw projected constant-row and constant-column lines of a surface."""
    nt, nx = np.asarray(a_grid).shape
    for i in range(0, nt, stride):
        u, v = project_oblique(a_grid[i], b_grid[i], c_grid[i], angle_deg, depth)
        canvas.polyline(u, v, stroke=stroke, width=width)
    for j in range(0, nx, stride):
        u, v = project_oblique(a_grid[:, j], b_grid[:, j], c_grid[:, j],
                               angle_deg, depth)
        canvas.polyline(u, v, stroke=stroke, width=width)


def wire_bounds(a_grid, b_grid, c_grid, angle_deg=30.0, depth=0.45, pad=0.08):
    """Data ranges of the oblique projection, padded for the canvas."""
    u, v = project_oblique(np.asarray(a_grid).ravel(), np.asarray(b_grid).ravel(),
                           np.asarray(c_grid).ravel(), angle_deg, depth)
    du = (u.max() - u.min()) or 1.0
    dv = (v.max() - v.min()) or 1.0
    return ((u.min() - pad * du, u.max() + pad * du),
            (v.min() - pad * dv, v.max() + pad * dv))
