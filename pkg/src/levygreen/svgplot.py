"""Minimal static SVG figures: kernel curves, ratio heatmaps, histograms.

Hand-rolled markup keeps the outputs byte-reproducible for identical
inputs, which the reporting contract requires.
"""

from __future__ import annotations

import numpy as np

__all__ = ["line_plot", "heatmap", "histogram"]

_W, _H, _PAD = 640, 420, 50


def _scale(vals, lo, hi, out_lo, out_hi):
    vals = np.asarray(vals, dtype=float)
    if hi <= lo:
        hi = lo + 1.0
    return out_lo + (vals - lo) / (hi - lo) * (out_hi - out_lo)


def _axes(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W // 2}" y="20" text-anchor="middle" font-size="14" '
        f'font-family="sans-serif">{title}</text>',
    ]


def line_plot(path, xs, series: dict, title: str = "", logy: bool = False,
              logx: bool = False) -> None:
    """Polyline plot of one or more named series against a shared axis."""
    xs = np.asarray(xs, dtype=float)
    tx = np.log10(xs) if logx else xs
    parts = _axes(title)
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    all_y = np.concatenate([np.asarray(v, dtype=float) for v in series.values()])
    if logy:
        all_y = np.log10(np.clip(all_y, 1e-300, None))
    ylo, yhi = float(np.min(all_y)), float(np.max(all_y))
    for k, (name, ys) in enumerate(series.items()):
        ys = np.asarray(ys, dtype=float)
        ty = np.log10(np.clip(ys, 1e-300, None)) if logy else ys
        px = _scale(tx, tx.min(), tx.max(), _PAD, _W - _PAD)
        py = _scale(ty, ylo, yhi, _H - _PAD, _PAD)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
        color = colors[k % len(colors)]
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     f'stroke-width="1.5"/>')
        parts.append(f'<text x="{_W - _PAD}" y="{_PAD + 16 * k}" text-anchor="end" '
                     f'font-size="12" font-family="sans-serif" fill="{color}">{name}</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))


def heatmap(path, matrix, title: str = "", v_lo: float | None = None,
            v_hi: float | None = None) -> None:
    """Color-cell heatmap of a matrix (blue low, white mid, red high)."""
    M = np.asarray(matrix, dtype=float)
    v_lo = float(np.min(M)) if v_lo is None else v_lo
    v_hi = float(np.max(M)) if v_hi is None else v_hi
    n, m = M.shape
    cw = (_W - 2 * _PAD) / m
    ch = (_H - 2 * _PAD) / n
    parts = _axes(title)
    span = max(v_hi - v_lo, 1e-300)
    for i in range(n):
        for j in range(m):
            t = (M[i, j] - v_lo) / span
            t = min(max(t, 0.0), 1.0)
            if t < 0.5:
                r, g, b = int(255 * 2 * t), int(255 * 2 * t), 255
            else:
                r, g, b = 255, int(255 * 2 * (1 - t)), int(255 * 2 * (1 - t))
            parts.append(f'<rect x="{_PAD + j * cw:.2f}" y="{_PAD + i * ch:.2f}" '
                         f'width="{cw:.2f}" height="{ch:.2f}" fill="rgb({r},{g},{b})"/>')
    parts.append(f'<text x="{_PAD}" y="{_H - 12}" font-size="11" '
                 f'font-family="sans-serif">range [{v_lo:.4g}, {v_hi:.4g}]</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))


def histogram(path, edges, counts, title: str = "") -> None:
    edges = np.asarray(edges, dtype=float)
    counts = np.asarray(counts, dtype=float)
    parts = _axes(title)
    top = max(float(np.max(counts)), 1.0)
    px = _scale(edges, edges.min(), edges.max(), _PAD, _W - _PAD)
    for k in range(len(counts)):
        h = counts[k] / top * (_H - 2 * _PAD)
        parts.append(f'<rect x="{px[k]:.2f}" y="{_H - _PAD - h:.2f}" '
                     f'width="{max(px[k + 1] - px[k] - 0.5, 0.5):.2f}" height="{h:.2f}" '
                     f'fill="#1f77b4"/>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))
