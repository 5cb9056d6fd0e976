"""Planar polygon helpers used for the site boundary."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .turbine import InvalidInput

EDGE_TOL = 1e-9


def _segments_cross(p1, p2, q1, q2):
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


@dataclass(frozen=True)
class Boundary:
    """Simple polygon, vertices in metres, implicitly closed."""

    vertices: tuple

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        if len(verts) > 3 and verts[0] == verts[-1]:
            verts = verts[:-1]
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise InvalidInput("a boundary needs at least 3 vertices")
        n = len(verts)
        for i in range(n):
            for j in range(i + 1, n):
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue
                if _segments_cross(verts[i], verts[(i + 1) % n], verts[j], verts[(j + 1) % n]):
                    raise InvalidInput(f"boundary edges {i} and {j} intersect")
        polygon_area(self)

    @classmethod
    def rectangle(cls, width, height, origin=(0.0, 0.0)):
        x0, y0 = origin
        return cls(((x0, y0), (x0 + width, y0), (x0 + width, y0 + height), (x0, y0 + height)))

    @property
    def xy(self):
        v = np.asarray(self.vertices, dtype=float)
        return np.ascontiguousarray(v[:, 0]), np.ascontiguousarray(v[:, 1])

    def bbox(self):
        v = np.asarray(self.vertices)
        return v[:, 0].min(), v[:, 1].min(), v[:, 0].max(), v[:, 1].max()

    def centroid(self):
        vx, vy = self.xy
        x1, y1 = np.roll(vx, -1), np.roll(vy, -1)
        cross = vx * y1 - x1 * vy
        a = cross.sum() / 2.0
        return float(((vx + x1) * cross).sum() / (6 * a)), float(((vy + y1) * cross).sum() / (6 * a))


def polygon_area(boundary) -> float:
    """Enclosed area in km² (shoelace)."""
    v = np.asarray(boundary.vertices if isinstance(boundary, Boundary) else boundary, dtype=float)
    x, y = v[:, 0], v[:, 1]
    area = abs(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)) / 2.0 / 1e6
    if area < 1e-12:
        raise InvalidInput("degenerate boundary polygon")
    return float(area)


@njit(cache=True, nogil=True)
def nearest_on_boundary(px, py, vx, vy):
    """Closest point on the polygon outline and its distance."""
    n = vx.shape[0]
    best = np.inf
    bx = px
    by = py
    for i in range(n):
        ax, ay = vx[i], vy[i]
        cx, cy = vx[(i + 1) % n], vy[(i + 1) % n]
        ex, ey = cx - ax, cy - ay
        ll = ex * ex + ey * ey
        t = ((px - ax) * ex + (py - ay) * ey) / ll if ll > 0.0 else 0.0
        t = min(max(t, 0.0), 1.0)
        qx, qy = ax + t * ex, ay + t * ey
        d = math.hypot(px - qx, py - qy)
        if d < best:
            best, bx, by = d, qx, qy
    return best, bx, by


@njit(cache=True, nogil=True)
def inside_kernel(px, py, vx, vy):
    """Even-odd ray cast; points within EDGE_TOL of an edge count as inside."""
    n = vx.shape[0]
    inside = False
    j = n - 1
    for i in range(n):
        xi, yi, xj, yj = vx[i], vy[i], vx[j], vy[j]
        if (yi > py) != (yj > py):
            xc = xi + (py - yi) * (xj - xi) / (yj - yi)
            if px < xc:
                inside = not inside
        j = i
    if inside:
        return True
    d, _, _ = nearest_on_boundary(px, py, vx, vy)
    return d <= EDGE_TOL


@njit(cache=True, nogil=True)
def outside_distance(px, py, vx, vy):
    if inside_kernel(px, py, vx, vy):
        return 0.0
    d, _, _ = nearest_on_boundary(px, py, vx, vy)
    return d


@njit(cache=True, nogil=True)
def penalty_kernel(x, y, vx, vy, min_spacing):
    """Squared boundary overshoot plus squared spacing shortfall, in m²."""
    n = x.shape[0]
    total = 0.0
    for i in range(n):
        d = outside_distance(x[i], y[i], vx, vy)
        total += d * d
    for i in range(n):
        for j in range(i + 1, n):
            gap = min_spacing - math.hypot(x[i] - x[j], y[i] - y[j])
            if gap > 0.0:
                total += gap * gap
    return total


def point_in_polygon(p, boundary: Boundary) -> bool:
    vx, vy = boundary.xy
    return bool(inside_kernel(float(p[0]), float(p[1]), vx, vy))


def distance_to_boundary(p, boundary: Boundary) -> float:
    vx, vy = boundary.xy
    d, _, _ = nearest_on_boundary(float(p[0]), float(p[1]), vx, vy)
    return float(d)


def nearest_inside(p, boundary: Boundary):
    """``p`` itself when inside, else the closest point of the outline."""
    vx, vy = boundary.xy
    px, py = float(p[0]), float(p[1])
    if inside_kernel(px, py, vx, vy):
        return px, py
    _, bx, by = nearest_on_boundary(px, py, vx, vy)
    return float(bx), float(by)
