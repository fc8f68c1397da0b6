"""Graded composite quadrature meshes on intervals.

Kernels of the killed process vanish like a fractional power of the boundary
distance, so panels are graded toward both interval endpoints.  The map
``t -> t^q / (t^q + (1-t)^q)`` clusters breakpoints at both ends with
exponent q while staying symmetric; Gauss-Legendre nodes inside each panel
keep the nodes strictly interior and the weights positive.
"""

from __future__ import annotations

import numpy as np

__all__ = ["graded_panels", "panel_rule"]

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def panel_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(order)
        _GL_CACHE[order] = (0.5 * (x + 1.0), 0.5 * w)   # nodes/weights on (0, 1)
    return _GL_CACHE[order]


def graded_panels(a: float, b: float, n_nodes: int, grading: float = 2.0,
                  order: int = 6) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on (a, b) graded toward both endpoints.

    grading is the clustering exponent (>= 1); n_nodes is rounded up to a
    whole number of panels of the given Gauss order.
    """
    if b <= a:
        raise ValueError("interval must have positive length")
    if grading < 1.0:
        raise ValueError("grading exponent must be >= 1")
    n_panels = max(2, int(np.ceil(n_nodes / order)))
    t = np.linspace(0.0, 1.0, n_panels + 1)
    tq, cq = t ** grading, (1.0 - t) ** grading
    breaks = a + (b - a) * tq / (tq + cq)
    xr, wr = panel_rule(order)
    left, width = breaks[:-1], np.diff(breaks)
    nodes = (left[:, None] + width[:, None] * xr[None, :]).ravel()
    weights = (width[:, None] * wr[None, :]).ravel()
    return nodes, weights


def power_panels(a: float, b: float, exponent: float, n_nodes: int, order: int = 8,
                 singular_end: str = "left") -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on (a, b) absorbing an algebraic endpoint singularity.

    Substituting distance = v**exponent turns an integrand that blows up like
    distance**(-p) into a smooth one whenever exponent * (1 - p) >= 1, so
    uniform panels in v converge at full Gauss order.  ``singular_end``
    selects which endpoint carries the singularity; use "both" for gaps
    between components (splits at the midpoint).
    """
    if singular_end == "both":
        mid = 0.5 * (a + b)
        nl, wl = power_panels(a, mid, exponent, n_nodes // 2, order, "left")
        nr, wr = power_panels(mid, b, exponent, n_nodes - n_nodes // 2, order, "right")
        return np.concatenate([nl, nr]), np.concatenate([wl, wr])
    length = b - a
    if length <= 0:
        raise ValueError("interval must have positive length")
    n_panels = max(2, int(np.ceil(n_nodes / order)))
    v_edges = np.linspace(0.0, length ** (1.0 / exponent), n_panels + 1)
    xr, wr = panel_rule(order)
    vleft, vwidth = v_edges[:-1], np.diff(v_edges)
    v = (vleft[:, None] + vwidth[:, None] * xr[None, :]).ravel()
    jac = exponent * v ** (exponent - 1.0)
    w = jac * (vwidth[:, None] * wr[None, :]).ravel()
    s = v ** exponent
    if singular_end == "left":
        return a + s, w
    if singular_end == "right":
        return (b - s)[::-1], w[::-1]
    raise ValueError("singular_end must be 'left', 'right' or 'both'")
