import math

from hypothesis import given
from hypothesis import strategies as st
from shapely.geometry import LineString, Point, Polygon

from chainplan.collision import (point_in_convex_polygon, point_segment_distance, polygon_area,
                                 polygon_is_convex_ccw, segment_distance,
                                 segment_polygon_distance, segments_intersect)

c = st.floats(-3, 3, allow_nan=False)
pt = st.tuples(c, c)
SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]


@given(pt, pt, pt)
def test_point_segment_distance_matches_shapely(p, a, b):
    ref = Point(p).distance(LineString([a, b])) if a != b else Point(p).distance(Point(a))
    assert math.isclose(point_segment_distance(*p, *a, *b), ref, abs_tol=1e-9)


@given(pt, pt, pt, pt)
def test_segment_distance_matches_shapely(a, b, p, q):
    if a == b or p == q:
        return
    ref = LineString([a, b]).distance(LineString([p, q]))
    assert math.isclose(segment_distance(a, b, p, q), ref, abs_tol=1e-9)


def test_touching_segments_intersect():
    assert segments_intersect((0, 0), (1, 0), (1, 0), (2, 1))
    assert segments_intersect((0, 0), (2, 0), (1, 0), (1, 1))
    assert not segments_intersect((0, 0), (1, 0), (0, 1), (1, 1))
    assert segments_intersect((0, 0), (2, 0), (1, 0), (3, 0))  # collinear overlap


def test_point_in_polygon_is_strict():
    assert point_in_convex_polygon((0.5, 0.5), SQUARE)
    assert not point_in_convex_polygon((1.0, 0.5), SQUARE)
    assert not point_in_convex_polygon((2, 2), SQUARE)


@given(pt, pt)
def test_segment_polygon_distance_matches_shapely(a, b):
    if a == b:
        return
    ref = LineString([a, b]).distance(Polygon(SQUARE))
    assert math.isclose(segment_polygon_distance(a, b, SQUARE), ref, abs_tol=1e-9)


def test_convexity_and_area():
    assert polygon_is_convex_ccw(SQUARE)
    assert not polygon_is_convex_ccw(list(reversed(SQUARE)))
    assert not polygon_is_convex_ccw([(0, 0), (2, 0), (1, 0.2), (1, 1)])
    assert not polygon_is_convex_ccw([(0, 0), (1, 0)])
    assert math.isclose(polygon_area(SQUARE), 1.0)
