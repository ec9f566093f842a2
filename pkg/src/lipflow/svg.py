"""Hand-rolled SVG emission: quiver plots and heatmaps.

No plotting library: quivers are line + triangle markers, heatmaps are rect
grids with a fixed blue-white-red colormap, so figures are bit-reproducible.
"""

from __future__ import annotations

import numpy as np

_W, _H, _PAD = 640, 640, 40


def _bounds(arrays):
    pts = np.vstack([np.atleast_2d(a) for a in arrays if len(a)])
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    lo -= 0.05 * span
    hi += 0.05 * span
    return lo, hi


def _project(p, lo, hi):
    x = _PAD + (p[0] - lo[0]) / (hi[0] - lo[0]) * (_W - 2 * _PAD)
    y = _H - _PAD - (p[1] - lo[1]) / (hi[1] - lo[1]) * (_H - 2 * _PAD)
    return x, y


def quiver_svg(particles, arrows, real_points, title: str = "") -> str:
    """Particles with gradient arrows plus real points, as an SVG document.

    particles, arrows: (n, 2) arrays; real_points: (m, 2) array.
    """
    particles = np.atleast_2d(np.asarray(particles, float))
    arrows = np.atleast_2d(np.asarray(arrows, float))
    real_points = np.atleast_2d(np.asarray(real_points, float))
    tips = particles + arrows
    lo, hi = _bounds([particles, tips, real_points])

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
    ]
    if title:
        parts.append(f'<text x="{_PAD}" y="24" font-size="16">{title}</text>')
    for p in real_points:
        x, y = _project(p, lo, hi)
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4" fill="#1f77b4"/>')
    for p, a in zip(particles, arrows):
        x0, y0 = _project(p, lo, hi)
        x1, y1 = _project(p + a, lo, hi)
        parts.append(f'<line x1="{x0:.2f}" y1="{y0:.2f}" x2="{x1:.2f}" '
                     f'y2="{y1:.2f}" stroke="#d62728" stroke-width="1.5"/>')
        # triangle arrowhead
        d = np.array([x1 - x0, y1 - y0])
        norm = np.hypot(*d)
        if norm > 1e-9:
            d /= norm
            n = np.array([-d[1], d[0]])
            b1 = np.array([x1, y1]) - 6 * d + 3 * n
            b2 = np.array([x1, y1]) - 6 * d - 3 * n
            parts.append(
                f'<polygon points="{x1:.2f},{y1:.2f} {b1[0]:.2f},{b1[1]:.2f} '
                f'{b2[0]:.2f},{b2[1]:.2f}" fill="#d62728"/>')
        parts.append(f'<circle cx="{x0:.2f}" cy="{y0:.2f}" r="3" fill="#2ca02c"/>')
    parts.append("</svg>")
    return "\n".join(parts)


def _bwr(t: float) -> str:
    """Fixed colormap: 0 -> blue, 0.5 -> white, 1 -> red."""
    t = min(1.0, max(0.0, t))
    if t < 0.5:
        s = t / 0.5
        r, g, b = int(255 * s), int(255 * s), 255
    else:
        s = (t - 0.5) / 0.5
        r, g, b = 255, int(255 * (1 - s)), int(255 * (1 - s))
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap_svg(matrix, title: str = "") -> str:
    """Matrix rendered as a rect grid; rows map bottom-up like y coordinates."""
    m = np.atleast_2d(np.asarray(matrix, float))
    ny, nx = m.shape
    lo, hi = float(m.min()), float(m.max())
    span = hi - lo if hi > lo else 1.0
    cw = (_W - 2 * _PAD) / nx
    ch = (_H - 2 * _PAD) / ny
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
    ]
    if title:
        parts.append(f'<text x="{_PAD}" y="24" font-size="16">{title}</text>')
    for i in range(ny):
        for j in range(nx):
            x = _PAD + j * cw
            y = _H - _PAD - (i + 1) * ch
            color = _bwr((m[i, j] - lo) / span)
            parts.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{cw + 0.5:.2f}" '
                         f'height="{ch + 0.5:.2f}" fill="{color}"/>')
    parts.append("</svg>")
    return "\n".join(parts)
