"""2D segment and convex-polygon proximity primitives."""
from __future__ import annotations

import math


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def point_segment_distance(px, py, ax, ay, bx, by) -> float:
    dx, dy = bx - ax, by - ay
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / L2
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def segments_intersect(a, b, c, d) -> bool:
    """Closed-segment intersection test (touching counts)."""
    ax, ay = a
    bx, by = b
    cx, cy = c
    dx, dy = d
    d1 = _orient(cx, cy, dx, dy, ax, ay)
    d2 = _orient(cx, cy, dx, dy, bx, by)
    d3 = _orient(ax, ay, bx, by, cx, cy)
    d4 = _orient(ax, ay, bx, by, dx, dy)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True

    def on(px, py, qx, qy, rx, ry, o):
        return o == 0 and min(px, qx) <= rx <= max(px, qx) and min(py, qy) <= ry <= max(py, qy)

    return (on(cx, cy, dx, dy, ax, ay, d1) or on(cx, cy, dx, dy, bx, by, d2)
            or on(ax, ay, bx, by, cx, cy, d3) or on(ax, ay, bx, by, dx, dy, d4))


def segment_distance(a, b, c, d) -> float:
    if segments_intersect(a, b, c, d):
        return 0.0
    return min(point_segment_distance(a[0], a[1], c[0], c[1], d[0], d[1]),
               point_segment_distance(b[0], b[1], c[0], c[1], d[0], d[1]),
               point_segment_distance(c[0], c[1], a[0], a[1], b[0], b[1]),
               point_segment_distance(d[0], d[1], a[0], a[1], b[0], b[1]))


def point_in_convex_polygon(p, poly) -> bool:
    """Strict interior test for a counterclockwise convex polygon."""
    px, py = p
    n = len(poly)
    for i in range(n):
        ax, ay = poly[i]
        bx, by = poly[(i + 1) % n]
        if _orient(ax, ay, bx, by, px, py) <= 0.0:
            return False
    return True


def segment_polygon_distance(a, b, poly) -> float:
    """Distance from a segment to a convex polygon (zero on overlap)."""
    if point_in_convex_polygon(a, poly) or point_in_convex_polygon(b, poly):
        return 0.0
    n = len(poly)
    return min(segment_distance(a, b, poly[i], poly[(i + 1) % n]) for i in range(n))


def polygon_is_convex_ccw(poly) -> bool:
    n = len(poly)
    if n < 3:
        return False
    for i in range(n):
        ax, ay = poly[i]
        bx, by = poly[(i + 1) % n]
        cx, cy = poly[(i + 2) % n]
        if _orient(ax, ay, bx, by, cx, cy) <= 0.0:
            return False
    return True


def polygon_area(poly) -> float:
    n = len(poly)
    return 0.5 * sum(poly[i][0] * poly[(i + 1) % n][1] - poly[(i + 1) % n][0] * poly[i][1]
                     for i in range(n))
