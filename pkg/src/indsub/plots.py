"""Minimal static SVG output: 2-D scatter and a K x K heat map."""

from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#2ca02c", "#d62728", "#1f77b4", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _fmt(v):
    return f"{v:.4f}"


def scatter_svg(points, labels, size=400, title=""):
    """Scatter of a 2 x N point array coloured by label, axes through the origin."""
    pts = np.asarray(points, dtype=float)
    labels = np.asarray(labels)
    pad = 20
    extent = float(np.max(np.abs(pts))) if pts.size else 1.0
    extent = extent or 1.0
    scale = (size / 2 - pad) / extent
    c = size / 2
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<line x1="{pad}" y1="{c}" x2="{size - pad}" y2="{c}" stroke="#999" stroke-width="0.5"/>',
        f'<line x1="{c}" y1="{pad}" x2="{c}" y2="{size - pad}" stroke="#999" stroke-width="0.5"/>',
    ]
    if title:
        out.append(f'<text x="{pad}" y="14" font-size="12" font-family="sans-serif">{escape(title)}</text>')
    for (x, y), lbl in zip(pts.T, labels):
        colour = PALETTE[(int(lbl) - 1) % len(PALETTE)]
        out.append(f'<circle cx="{_fmt(c + scale * x)}" cy="{_fmt(c - scale * y)}" r="2" fill="{colour}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def heatmap_svg(matrix, cell=24, title=""):
    """Grey-scale map of |entries| (white = 1, black = 0)."""
    m = np.abs(np.asarray(matrix, dtype=float))
    k = m.shape[0]
    top = 20 if title else 0
    w, h = k * cell, k * cell + top
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">']
    if title:
        out.append(f'<text x="2" y="14" font-size="12" font-family="sans-serif">{escape(title)}</text>')
    for i in range(k):
        for j in range(k):
            g = int(round(255 * min(max(m[i, j], 0.0), 1.0)))
            out.append(
                f'<rect x="{j * cell}" y="{top + i * cell}" width="{cell}" height="{cell}" fill="rgb({g},{g},{g})"/>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"
