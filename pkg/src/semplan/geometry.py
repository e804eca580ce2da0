"""Planar primitives: points, simple polygons, containment and distance.

Containment uses cross-product (winding number) edge tests rather than ray
casting, with a three-valued result so behaviour on contour edges is
explicit and testable. Polygons are validated once at construction and
normalized to counter-clockwise vertex order, so every Polygon2 in the
system satisfies the invariants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .errors import DegeneratePolygon, InvalidPolygon

# Distance (meters) below which a point counts as lying on a contour edge.
BOUNDARY_EPS = 1e-9

# Polygons thinner than this (square meters) have no usable centroid.
MIN_AREA = 1e-12


class Containment(Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        x = float(self.x)
        y = float(self.y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError(f"non-finite coordinate ({self.x}, {self.y})")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


def cross(origin: Point2, a: Point2, b: Point2) -> float:
    """z-component of (a - origin) x (b - origin).

    Positive when b lies counter-clockwise of a about origin, negative when
    clockwise, zero when the three points are collinear.
    """
    return (a.x - origin.x) * (b.y - origin.y) - (a.y - origin.y) * (b.x - origin.x)


def euclidean(a: Point2, b: Point2) -> float:
    """Euclidean distance in meters."""
    return math.hypot(a.x - b.x, a.y - b.y)


def _dot_from(origin: Point2, a: Point2, b: Point2) -> float:
    return (a.x - origin.x) * (b.x - origin.x) + (a.y - origin.y) * (b.y - origin.y)


def _on_segment(p: Point2, a: Point2, b: Point2) -> bool:
    # Collinearity is assumed; checks the bounding box only.
    return (
        min(a.x, b.x) <= p.x <= max(a.x, b.x)
        and min(a.y, b.y) <= p.y <= max(a.y, b.y)
    )


def _segments_touch(a: Point2, b: Point2, c: Point2, d: Point2) -> bool:
    """True when closed segments ab and cd share at least one point."""
    d1 = cross(c, d, a)
    d2 = cross(c, d, b)
    d3 = cross(a, b, c)
    d4 = cross(a, b, d)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True
    if d1 == 0 and _on_segment(a, c, d):
        return True
    if d2 == 0 and _on_segment(b, c, d):
        return True
    if d3 == 0 and _on_segment(c, a, b):
        return True
    if d4 == 0 and _on_segment(d, a, b):
        return True
    return False


def segment_distance(p: Point2, a: Point2, b: Point2) -> float:
    """Distance from p to the closed segment ab."""
    dx, dy = b.x - a.x, b.y - a.y
    seg_len_sq = dx * dx + dy * dy
    if seg_len_sq == 0.0:
        return euclidean(p, a)
    t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / seg_len_sq
    t = max(0.0, min(1.0, t))
    return math.hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy))


def _signed_area2(vertices: Sequence[Point2]) -> float:
    """Twice the signed area (positive for counter-clockwise contours)."""
    total = 0.0
    n = len(vertices)
    for i in range(n):
        a = vertices[i]
        b = vertices[(i + 1) % n]
        total += a.x * b.y - a.y * b.x
    return total


@dataclass(frozen=True)
class Polygon2:
    """A simple polygon, stored counter-clockwise.

    Construction validates the contour and raises InvalidPolygon with a
    reason code when it has fewer than three vertices, repeats a vertex
    consecutively (including the closing wrap) or self-intersects.
    """

    vertices: tuple[Point2, ...]

    def __post_init__(self):
        verts = tuple(self.vertices)
        if len(verts) < 3:
            raise InvalidPolygon("TooFewVertices", f"got {len(verts)}")
        n = len(verts)
        for i in range(n):
            if verts[i] == verts[(i + 1) % n]:
                raise InvalidPolygon("DuplicateVertex", f"at index {i}")
        _check_simple(verts)
        if _signed_area2(verts) < 0:
            verts = tuple(reversed(verts))
        object.__setattr__(self, "vertices", verts)

    def edges(self) -> Iterable[tuple[Point2, Point2]]:
        n = len(self.vertices)
        for i in range(n):
            yield self.vertices[i], self.vertices[(i + 1) % n]


def _check_simple(verts: tuple[Point2, ...]) -> None:
    n = len(verts)
    for i in range(n):
        a, b = verts[i], verts[(i + 1) % n]
        for j in range(i + 1, n):
            c, d = verts[j], verts[(j + 1) % n]
            adjacent = j == i + 1 or (i == 0 and j == n - 1)
            if adjacent:
                # The shared endpoint is legal; doubling back along the
                # incoming edge is not.
                shared = b if j == i + 1 else a
                u = a if j == i + 1 else b
                w = d if j == i + 1 else c
                if cross(shared, u, w) == 0 and _dot_from(shared, u, w) > 0:
                    raise InvalidPolygon(
                        "SelfIntersecting", f"edges {i} and {j} overlap"
                    )
            elif _segments_touch(a, b, c, d):
                raise InvalidPolygon("SelfIntersecting", f"edges {i} and {j} cross")


def validate_polygon(raw_vertices: Iterable[Sequence[float] | Point2]) -> Polygon2:
    """Build a Polygon2 from raw (x, y) pairs, validating and normalizing."""
    points = tuple(
        v if isinstance(v, Point2) else Point2(float(v[0]), float(v[1]))
        for v in raw_vertices
    )
    return Polygon2(points)


def point_in_polygon(p: Point2, poly: Polygon2) -> Containment:
    """Three-valued containment via the winding number.

    BOUNDARY wins whenever p lies within BOUNDARY_EPS of any edge; otherwise
    the winding number decides INSIDE vs OUTSIDE. Works for concave simple
    polygons.
    """
    for a, b in poly.edges():
        if segment_distance(p, a, b) <= BOUNDARY_EPS:
            return Containment.BOUNDARY
    winding = 0
    for a, b in poly.edges():
        if a.y <= p.y:
            if b.y > p.y and cross(a, b, p) > 0:
                winding += 1
        elif b.y <= p.y and cross(a, b, p) < 0:
            winding -= 1
    return Containment.INSIDE if winding != 0 else Containment.OUTSIDE


def contains(p: Point2, poly: Polygon2) -> bool:
    """Inside-or-boundary convenience predicate."""
    return point_in_polygon(p, poly) is not Containment.OUTSIDE


def centroid(poly: Polygon2) -> Point2:
    """Area-weighted centroid of a simple polygon."""
    area2 = _signed_area2(poly.vertices)
    if abs(area2) / 2.0 < MIN_AREA:
        raise DegeneratePolygon(f"area {abs(area2) / 2.0} below {MIN_AREA}")
    cx = 0.0
    cy = 0.0
    for a, b in poly.edges():
        w = a.x * b.y - b.x * a.y
        cx += (a.x + b.x) * w
        cy += (a.y + b.y) * w
    factor = 1.0 / (3.0 * area2)
    return Point2(cx * factor, cy * factor)
