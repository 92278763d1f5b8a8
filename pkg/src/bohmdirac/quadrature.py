"""Composite Gauss-Legendre rules on 1-d windows.

Tensor-product quadrature over N-particle windows is assembled from these
1-d rules; for the separable integrands produced by finite mode sums the
tensor sum factorizes exactly into products of 1-d sums, which is how the
normalization code evaluates it.
"""

from __future__ import annotations

import numpy as np


def gauss_legendre_panels(a, b, n_panels, order):
    """Nodes and weights of a composite Gauss-Legendre rule on [a, b]."""
    base_x, base_w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * base_x[None, :]).ravel()
    weights = (half[:, None] * base_w[None, :]).ravel()
    return nodes, weights


def panels_for(a, b, max_wavenumber, min_panels=8, nodes_per_wavelength=6.0,
               max_panel_width=0.5):
    """Panel count resolving oscillations of wavelength 2*pi/max_wavenumber."""
    width = b - a
    if max_wavenumber > 0:
        lam = 2.0 * np.pi / max_wavenumber
        osc_width = lam * 16.0 / nodes_per_wavelength  # ~16-point panels
        panel = min(max_panel_width, osc_width)
    else:
        panel = max_panel_width
    return max(min_panels, int(np.ceil(width / panel)))


def window_rule(window, max_wavenumber, order=16, extra_edges=()):
    """Composite rule over a window, with panel edges forced at ``extra_edges``.

    Forced edges keep panels from straddling non-smooth density features
    (plateau boundaries of degenerate foliations).
    """
    a, b = window
    n_panels = panels_for(a, b, max_wavenumber)
    edges = set(np.linspace(a, b, n_panels + 1).tolist())
    for e in extra_edges:
        if a < e < b:
            edges.add(float(e))
    edges = np.array(sorted(edges))
    base_x, base_w = np.polynomial.legendre.leggauss(order)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * base_x[None, :]).ravel()
    weights = (half[:, None] * base_w[None, :]).ravel()
    return nodes, weights
