"""Minimal SVG output for layouts and flow fields (no plotting library)."""
from __future__ import annotations

from pathlib import Path

import numpy as np

_VIRIDIS = [(68, 1, 84), (59, 82, 139), (33, 145, 140), (94, 201, 98), (253, 231, 37)]


def _colour(t):
    t = min(max(t, 0.0), 1.0) * (len(_VIRIDIS) - 1)
    i = min(int(t), len(_VIRIDIS) - 2)
    f = t - i
    a, b = _VIRIDIS[i], _VIRIDIS[i + 1]
    return "#%02x%02x%02x" % tuple(round(a[k] + f * (b[k] - a[k])) for k in range(3))


class _Canvas:
    def __init__(self, xmin, ymin, xmax, ymax, width=800):
        self.xmin, self.ymax = xmin, ymax
        self.s = width / max(xmax - xmin, 1e-9)
        self.w = width
        self.h = (ymax - ymin) * self.s
        self.parts = []

    def pt(self, x, y):
        # north up: flip y
        return (x - self.xmin) * self.s, (self.ymax - y) * self.s

    def svg(self):
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w:.0f}" height="{self.h:.0f}" '
                f'viewBox="0 0 {self.w:.2f} {self.h:.2f}">')
        return "\n".join([head, *self.parts, "</svg>\n"])


def _boundary(c, vertices):
    pts = " ".join("%.2f,%.2f" % c.pt(x, y) for x, y in vertices)
    c.parts.append(f'<polygon points="{pts}" fill="none" stroke="black" stroke-width="1.5"/>')


def layout_svg(pos, vertices, path, rotor_diameter=None):
    v = np.asarray(vertices, dtype=float)
    pad = 0.05 * max(np.ptp(v[:, 0]), np.ptp(v[:, 1]))
    c = _Canvas(v[:, 0].min() - pad, v[:, 1].min() - pad, v[:, 0].max() + pad, v[:, 1].max() + pad)
    _boundary(c, v)
    r = max(3.0, 0.5 * (rotor_diameter or 0) * c.s)
    for x, y in np.asarray(pos, dtype=float):
        px, py = c.pt(x, y)
        c.parts.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="{r:.2f}" fill="#c0392b"/>')
    Path(path).write_text(c.svg())


def flowfield_svg(grid, path, vertices=None, pos=None, vmax=None):
    xs, ys = grid.cell_centers()
    h = grid.cell_size / 2
    c = _Canvas(xs[0] - h, ys[0] - h, xs[-1] + h, ys[-1] + h)
    vmax = vmax or float(grid.speeds.max()) or 1.0
    vmin = float(grid.speeds.min())
    span = max(vmax - vmin, 1e-9)
    side = grid.cell_size * c.s
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            px, py = c.pt(x - h, y + h)
            col = _colour((grid.speeds[i, j] - vmin) / span)
            c.parts.append(f'<rect x="{px:.2f}" y="{py:.2f}" width="{side + 0.05:.2f}" '
                           f'height="{side + 0.05:.2f}" fill="{col}"/>')
    if vertices is not None:
        _boundary(c, vertices)
    if pos is not None:
        for x, y in np.asarray(pos, dtype=float):
            px, py = c.pt(x, y)
            c.parts.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="2.5" fill="white"/>')
    Path(path).write_text(c.svg())
