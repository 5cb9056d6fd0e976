import math

import numpy as np
import pytest

from farmlayout.geometry import (Boundary, distance_to_boundary, nearest_inside, point_in_polygon,
                                 polygon_area)
from farmlayout.turbine import InvalidInput

# non-convex "comb" polygon
COMB = Boundary(((0, 0), (10, 0), (10, 10), (7, 10), (7, 3), (5, 3), (5, 10), (3, 10), (3, 3),
                 (1, 3), (1, 10), (0, 10)))


def winding_number(p, verts):
    """Sum of signed angles subtended by the edges; |w| ~ 2 pi inside."""
    total = 0.0
    n = len(verts)
    for i in range(n):
        ax, ay = verts[i][0] - p[0], verts[i][1] - p[1]
        bx, by = verts[(i + 1) % n][0] - p[0], verts[(i + 1) % n][1] - p[1]
        total += math.atan2(ax * by - ay * bx, ax * bx + ay * by)
    return round(total / (2 * math.pi))


def test_centroid_inside():
    sq = Boundary.rectangle(1000, 1000)
    assert point_in_polygon(sq.centroid(), sq)


def test_outside_bbox():
    assert not point_in_polygon((20.0, 5.0), COMB)
    assert not point_in_polygon((-0.1, -0.1), COMB)


def test_edge_points_count_as_inside():
    assert point_in_polygon((10.0, 5.0), COMB)
    assert point_in_polygon((0.0, 0.0), COMB)
    assert point_in_polygon((4.0, 3.0), COMB)
    assert point_in_polygon((10.0 + 5e-10, 5.0), COMB)
    assert not point_in_polygon((10.0 + 1e-6, 5.0), COMB)


def test_matches_winding_number_on_non_convex(rng):
    probes = rng.uniform(-1, 11, (1000, 2))
    for p in probes:
        if distance_to_boundary(p, COMB) < 1e-6:
            continue
        assert point_in_polygon(p, COMB) == (winding_number(p, COMB.vertices) != 0)


def test_area_unit_square():
    assert polygon_area(Boundary.rectangle(1000, 1000)) == pytest.approx(1.0, abs=1e-12)


def test_area_utsira_rectangle():
    assert polygon_area(Boundary.rectangle(13_400, 13_380)) == pytest.approx(179.292, abs=1e-6)


def test_area_independent_of_orientation():
    rev = Boundary(tuple(reversed(COMB.vertices)))
    assert polygon_area(rev) == polygon_area(COMB)
    assert polygon_area(COMB) == pytest.approx((100 - 2 * 2 * 7) / 1e6)


def test_degenerate_and_invalid_polygons():
    with pytest.raises(InvalidInput):
        Boundary(((0, 0), (1, 1), (2, 2)))
    with pytest.raises(InvalidInput):
        Boundary(((0, 0), (1, 0)))
    with pytest.raises(InvalidInput):
        Boundary(((0, 0), (10, 10), (10, 0), (0, 10)))  # bow tie


def test_nearest_inside():
    assert nearest_inside((5.0, 5.0), Boundary.rectangle(10, 10)) == (5.0, 5.0)
    x, y = nearest_inside((12.0, 5.0), Boundary.rectangle(10, 10))
    assert (x, y) == pytest.approx((10.0, 5.0))
    assert point_in_polygon((x, y), Boundary.rectangle(10, 10))
