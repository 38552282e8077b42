"""Geometric predicates and constructions for convex polygons and vertical prisms.

Everything here is a pure function on immutable tuples.  Points are plain
``(x, y)`` or ``(x, y, z)`` tuples so they serialise trivially and hash.  The
tolerance ``eps`` passed to predicates is the scenario's geometric tolerance,
1e-9 times the map diagonal (see :func:`eps_for_extent`); touching within that
tolerance counts as intersecting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

from .errors import DegenerateRegion, GeometryError, OverlappingObstacles, ZeroVector

Point2 = tuple[float, float]
Point3 = tuple[float, float, float]

EPS_REL = 1e-9


def eps_for_extent(extent: Sequence[float]) -> float:
    """Geometric tolerance for a map: 1e-9 x its (2D) diagonal."""
    return EPS_REL * math.hypot(extent[0], extent[1])


def cross(ax: float, ay: float, bx: float, by: float) -> float:
    return ax * by - ay * bx


def orient(a: Point2, b: Point2, c: Point2) -> float:
    """Twice the signed area of triangle abc (positive when counter-clockwise)."""
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def dist(a: Sequence[float], b: Sequence[float]) -> float:
    return math.dist(a, b)


def point_segment_closest(p: Point2, a: Point2, b: Point2) -> tuple[float, Point2, float]:
    """Distance from p to segment ab, the closest point and its parameter."""
    dx = b[0] - a[0]
    dy = b[1] - a[1]
    den = dx * dx + dy * dy
    if den == 0.0:
        t = 0.0
    else:
        t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / den
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    q = (a[0] + t * dx, a[1] + t * dy)
    return math.hypot(p[0] - q[0], p[1] - q[1]), q, t


def point_segment_distance(p: Point2, a: Point2, b: Point2) -> float:
    return point_segment_closest(p, a, b)[0]


# ---------------------------------------------------------------------------
# Polygons
# ---------------------------------------------------------------------------


def signed_area(ring: Sequence[Point2]) -> float:
    s = 0.0
    n = len(ring)
    for k in range(n):
        x0, y0 = ring[k]
        x1, y1 = ring[(k + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def ring_centroid(ring: Sequence[Point2]) -> Point2:
    a = 0.0
    cx = 0.0
    cy = 0.0
    n = len(ring)
    for k in range(n):
        x0, y0 = ring[k]
        x1, y1 = ring[(k + 1) % n]
        w = x0 * y1 - x1 * y0
        a += w
        cx += (x0 + x1) * w
        cy += (y0 + y1) * w
    if a == 0.0:
        raise GeometryError("centroid of a zero-area ring")
    return (cx / (3.0 * a), cy / (3.0 * a))


@dataclass(frozen=True)
class ConvexPolygon:
    """Strictly convex polygon with counter-clockwise vertices."""

    vertices: tuple[Point2, ...]

    def __post_init__(self) -> None:
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        n = len(verts)
        if n < 3:
            raise GeometryError("polygon needs at least 3 vertices")
        for x, y in verts:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise GeometryError("non-finite vertex coordinate")
        if signed_area(verts) <= 0.0:
            raise GeometryError("polygon must be counter-clockwise with nonzero area")
        for k in range(n):
            if orient(verts[k - 1], verts[k], verts[(k + 1) % n]) <= 0.0:
                raise GeometryError("polygon is not strictly convex")

    @classmethod
    def from_points(cls, pts: Sequence[Sequence[float]]) -> "ConvexPolygon":
        """Build from vertices in either orientation."""
        verts = [(float(p[0]), float(p[1])) for p in pts]
        if len(verts) >= 3 and signed_area(verts) < 0.0:
            verts.reverse()
        return cls(tuple(verts))

    def __len__(self) -> int:
        return len(self.vertices)

    @cached_property
    def area(self) -> float:
        return signed_area(self.vertices)

    @cached_property
    def centroid(self) -> Point2:
        return ring_centroid(self.vertices)

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return (min(xs), min(ys), max(xs), max(ys))

    def edges(self) -> list[tuple[Point2, Point2]]:
        v = self.vertices
        return [(v[k], v[(k + 1) % len(v)]) for k in range(len(v))]

    def perimeter(self) -> float:
        return sum(dist(a, b) for a, b in self.edges())


def square(center: Point2, side: float, angle: float = 0.0) -> ConvexPolygon:
    """Square of the given side rotated by ``angle`` radians about its center."""
    h = 0.5 * side
    c = math.cos(angle)
    s = math.sin(angle)
    pts = []
    for ux, uy in ((-h, -h), (h, -h), (h, h), (-h, h)):
        pts.append((center[0] + c * ux - s * uy, center[1] + s * ux + c * uy))
    return ConvexPolygon(tuple(pts))


def rectangle(x0: float, y0: float, x1: float, y1: float) -> ConvexPolygon:
    return ConvexPolygon(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))


def _project(verts: Sequence[Point2], ax: float, ay: float) -> tuple[float, float]:
    lo = math.inf
    hi = -math.inf
    for x, y in verts:
        s = x * ax + y * ay
        if s < lo:
            lo = s
        if s > hi:
            hi = s
    return lo, hi


def _axes(verts: Sequence[Point2]) -> list[tuple[float, float]]:
    out = []
    n = len(verts)
    for k in range(n):
        ex = verts[(k + 1) % n][0] - verts[k][0]
        ey = verts[(k + 1) % n][1] - verts[k][1]
        ln = math.hypot(ex, ey)
        if ln > 0.0:
            out.append((-ey / ln, ex / ln))
    return out


def max_separation(a: Sequence[Point2], b: Sequence[Point2], extra_axes=()) -> float:
    """Largest gap between projections over the separating-axis candidates.

    Positive means strictly separated by that much along some axis; negative
    is the (minimum) penetration depth.
    """
    best = -math.inf
    for ax, ay in list(extra_axes) + _axes(a) + _axes(b):
        alo, ahi = _project(a, ax, ay)
        blo, bhi = _project(b, ax, ay)
        gap = max(blo - ahi, alo - bhi)
        if gap > best:
            best = gap
    return best


def convex_intersect(a: Sequence[Point2], b: Sequence[Point2], eps: float = 0.0) -> bool:
    """Closed convex sets intersect, with a gap of at most ``eps`` tolerated."""
    return max_separation(a, b) <= eps


def interiors_overlap(a: ConvexPolygon, b: ConvexPolygon, eps: float = 0.0) -> bool:
    """True when the interiors overlap by more than ``eps`` along every axis."""
    return max_separation(a.vertices, b.vertices) < -eps


def point_in_convex(p: Point2, verts: Sequence[Point2], eps: float = 0.0) -> bool:
    """Closed point-in-convex-polygon test (vertices counter-clockwise)."""
    n = len(verts)
    for k in range(n):
        a = verts[k]
        b = verts[(k + 1) % n]
        ln = math.hypot(b[0] - a[0], b[1] - a[1])
        if orient(a, b, p) < -eps * ln:
            return False
    return True


def point_polygon_distance(p: Point2, verts: Sequence[Point2]) -> float:
    if point_in_convex(p, verts):
        return 0.0
    n = len(verts)
    return min(point_segment_distance(p, verts[k], verts[(k + 1) % n]) for k in range(n))


def point_obstacle_distance(x: Sequence[float], footprint: ConvexPolygon, height: float = math.inf) -> float:
    """Distance from a 2D point to a polygon, or from a 3D point to a prism.

    Zero exactly when the point lies in the closed obstacle.
    """
    d2 = point_polygon_distance((x[0], x[1]), footprint.vertices)
    if len(x) < 3:
        return d2
    dz = max(0.0, x[2] - height)
    if dz == 0.0:
        return d2
    return math.hypot(d2, dz)


# ---------------------------------------------------------------------------
# Obstacle distance and passage regions
# ---------------------------------------------------------------------------


class Closest(NamedTuple):
    pi: Point2
    pj: Point2
    d: float


def _candidates(oi: ConvexPolygon, oj: ConvexPolygon) -> list[tuple[float, Point2, Point2]]:
    out = []
    vi = oi.vertices
    vj = oj.vertices
    ni = len(vi)
    nj = len(vj)
    for v in vi:
        for k in range(nj):
            d, q, _ = point_segment_closest(v, vj[k], vj[(k + 1) % nj])
            out.append((d, v, q))
    for v in vj:
        for k in range(ni):
            d, q, _ = point_segment_closest(v, vi[k], vi[(k + 1) % ni])
            out.append((d, q, v))
    return out


def obstacle_distance(oi: ConvexPolygon, oj: ConvexPolygon, eps: float = 0.0) -> Closest:
    """Closest points and distance between two disjoint convex polygons.

    Exact vertex/edge enumeration.  When the minimum is attained along a pair
    of parallel facing edges the midpoint of the overlap is returned, which
    keeps the result symmetric under swapping the arguments.
    """
    if interiors_overlap(oi, oj, eps):
        raise OverlappingObstacles("obstacle interiors overlap")
    return _closest_from_candidates(_candidates(oi, oj))


def _closest_from_candidates(cands: list[tuple[float, Point2, Point2]]) -> Closest:
    dmin = min(c[0] for c in cands)
    tol = 1e-12 * (1.0 + dmin) + 1e-12 * max(abs(c[1][0]) + abs(c[1][1]) for c in cands)
    close = [c for c in cands if c[0] <= dmin + tol]
    if len(close) == 1:
        return Closest(close[0][1], close[0][2], dmin)
    if dmin > 0.0:
        d0, pi0, pj0 = close[0]
        ex = (pj0[0] - pi0[0]) / d0
        ey = (pj0[1] - pi0[1]) / d0
        nx, ny = -ey, ex
        lo = hi = close[0]
        aligned = True
        for c in close:
            dx = c[2][0] - c[1][0]
            dy = c[2][1] - c[1][1]
            if abs(cross(dx, dy, ex, ey)) > 1e-9 * (1.0 + dmin):
                aligned = False
                break
            s = c[1][0] * nx + c[1][1] * ny
            if s < lo[1][0] * nx + lo[1][1] * ny:
                lo = c
            if s > hi[1][0] * nx + hi[1][1] * ny:
                hi = c
        if aligned:
            pi = (0.5 * (lo[1][0] + hi[1][0]), 0.5 * (lo[1][1] + hi[1][1]))
            pj = (0.5 * (lo[2][0] + hi[2][0]), 0.5 * (lo[2][1] + hi[2][1]))
            return Closest(pi, pj, dmin)
    # canonical choice independent of argument order
    best = min(close, key=lambda c: (min(c[1], c[2]), max(c[1], c[2])))
    return Closest(best[1], best[2], dmin)


@dataclass(frozen=True)
class PassageRegion:
    """Rectangle spanned by the two obstacles' common shadow.

    ``polygon`` lists the four corners counter-clockwise.  The lateral side may
    have zero length when the shadows only share the closest-point line.
    """

    polygon: tuple[Point2, ...]
    axis: Point2
    lateral: tuple[float, float]
    span: tuple[float, float]

    def contains(self, p: Point2, eps: float = 0.0) -> bool:
        ex, ey = self.axis
        s = p[0] * ex + p[1] * ey
        t = -p[0] * ey + p[1] * ex
        return (self.span[0] - eps <= s <= self.span[1] + eps) and (
            self.lateral[0] - eps <= t <= self.lateral[1] + eps
        )


def region_from_closest(vi: Sequence[Point2], vj: Sequence[Point2], pi: Point2, pj: Point2, d: float) -> PassageRegion:
    ex = (pj[0] - pi[0]) / d
    ey = (pj[1] - pi[1]) / d
    nx, ny = -ey, ex
    a1, b1 = _project(vi, nx, ny)
    a2, b2 = _project(vj, nx, ny)
    lo = max(a1, a2)
    hi = min(b1, b2)
    if hi < lo:
        lo = hi = pi[0] * nx + pi[1] * ny
    s0 = pi[0] * ex + pi[1] * ey
    s1 = pj[0] * ex + pj[1] * ey
    corners = (
        (s0 * ex + lo * nx, s0 * ey + lo * ny),
        (s1 * ex + lo * nx, s1 * ey + lo * ny),
        (s1 * ex + hi * nx, s1 * ey + hi * ny),
        (s0 * ex + hi * nx, s0 * ey + hi * ny),
    )
    return PassageRegion(corners, (ex, ey), (lo, hi), (s0, s1))


def passage_region(oi: ConvexPolygon, oj: ConvexPolygon, eps: float = 0.0, closest: Closest | None = None) -> PassageRegion:
    """Intersection of the two obstacles' shadow volumes along the distance direction.

    Each shadow is the obstacle swept along the unit distance direction and
    clipped to the half-plane ahead of the obstacle's support line, so the
    intersection is the rectangle between the support lines over the lateral
    overlap of the two projections.
    """
    if closest is None:
        closest = obstacle_distance(oi, oj, eps)
    pi, pj, d = closest
    if d <= eps:
        raise DegenerateRegion("obstacles touch; no passage region")
    return region_from_closest(oi.vertices, oj.vertices, pi, pj, d)


def shadow_contains(o: ConvexPolygon, axis: Point2, start: float, length: float, p: Point2, eps: float = 0.0) -> bool:
    """Membership in the polygon swept ``length`` along ``axis``, clipped to s >= start."""
    ex, ey = axis
    s = p[0] * ex + p[1] * ey
    if s < start - eps:
        return False
    # p is in the sweep iff the ray p - t*axis (0 <= t <= length) meets o
    q = (p[0] - length * ex, p[1] - length * ey)
    return max_separation(o.vertices, (p, q), extra_axes=[(-ey, ex)]) <= eps


# ---------------------------------------------------------------------------
# Segments and gates
# ---------------------------------------------------------------------------


class Segment(NamedTuple):
    a: Point2
    b: Point2


class Gate(NamedTuple):
    """Vertical rectangle over a 2D segment between two heights."""

    a: Point2
    b: Point2
    h_lo: float
    h_hi: float


def segments_intersect(s1: Segment, s2: Segment, eps: float = 0.0) -> bool:
    """Closed segments share a point, within ``eps``."""
    return seg_seg_intersect(s1[0], s1[1], s2[0], s2[1], eps)


def seg_seg_intersect(a: Point2, b: Point2, c: Point2, d: Point2, eps: float = 0.0) -> bool:
    d1 = orient(c, d, a)
    d2 = orient(c, d, b)
    d3 = orient(a, b, c)
    d4 = orient(a, b, d)
    if ((d1 > 0.0 and d2 < 0.0) or (d1 < 0.0 and d2 > 0.0)) and (
        (d3 > 0.0 and d4 < 0.0) or (d3 < 0.0 and d4 > 0.0)
    ):
        return True
    return (
        min(
            point_segment_distance(a, c, d),
            point_segment_distance(b, c, d),
            point_segment_distance(c, a, b),
            point_segment_distance(d, a, b),
        )
        <= eps
    )


def crossing_param(a: Point2, b: Point2, c: Point2, d: Point2) -> float:
    """Parameter along ab of its meeting point with cd (assumes they meet)."""
    rx = b[0] - a[0]
    ry = b[1] - a[1]
    sx = d[0] - c[0]
    sy = d[1] - c[1]
    den = cross(rx, ry, sx, sy)
    ln2 = rx * rx + ry * ry
    if ln2 == 0.0:
        return 0.0
    if abs(den) > 1e-12 * math.sqrt(ln2 * (sx * sx + sy * sy)):
        t = cross(c[0] - a[0], c[1] - a[1], sx, sy) / den
    else:
        tc = ((c[0] - a[0]) * rx + (c[1] - a[1]) * ry) / ln2
        td = ((d[0] - a[0]) * rx + (d[1] - a[1]) * ry) / ln2
        t = min(tc, td)
    return min(1.0, max(0.0, t))


def segment_gate_intersect(p: Point3, q: Point3, gate: Gate, eps: float = 0.0) -> bool:
    """3D segment pq crosses the bounded vertical gate rectangle."""
    p2 = (p[0], p[1])
    q2 = (q[0], q[1])
    lo = gate.h_lo - eps
    hi = gate.h_hi + eps
    rx = q2[0] - p2[0]
    ry = q2[1] - p2[1]
    ln2 = rx * rx + ry * ry
    if ln2 <= eps * eps:
        if point_segment_distance(p2, gate.a, gate.b) > eps:
            return False
        return min(p[2], q[2]) <= hi and max(p[2], q[2]) >= lo
    if not seg_seg_intersect(p2, q2, gate.a, gate.b, eps):
        return False
    sx = gate.b[0] - gate.a[0]
    sy = gate.b[1] - gate.a[1]
    den = cross(rx, ry, sx, sy)
    if abs(den) > 1e-12 * math.sqrt(ln2 * (sx * sx + sy * sy)):
        t = cross(gate.a[0] - p2[0], gate.a[1] - p2[1], sx, sy) / den
        t = min(1.0, max(0.0, t))
        z = p[2] + t * (q[2] - p[2])
        return lo <= z <= hi
    ta = ((gate.a[0] - p2[0]) * rx + (gate.a[1] - p2[1]) * ry) / ln2
    tb = ((gate.b[0] - p2[0]) * rx + (gate.b[1] - p2[1]) * ry) / ln2
    t0 = max(0.0, min(ta, tb))
    t1 = min(1.0, max(ta, tb))
    if t1 < t0:
        t0 = t1 = min(1.0, max(0.0, t0))
    z0 = p[2] + t0 * (q[2] - p[2])
    z1 = p[2] + t1 * (q[2] - p[2])
    return min(z0, z1) <= hi and max(z0, z1) >= lo


def disc_region_obstacle_intersect(
    pi: Point2, pj: Point2, region: PassageRegion | None, ok: ConvexPolygon, eps: float = 0.0
) -> bool:
    """Obstacle meets the closed disc on l(pi, pj) or the passage region."""
    center = (0.5 * (pi[0] + pj[0]), 0.5 * (pi[1] + pj[1]))
    r = 0.5 * dist(pi, pj)
    if point_polygon_distance(center, ok.vertices) <= r + eps:
        return True
    if region is None:
        return False
    ex, ey = region.axis
    return max_separation(region.polygon, ok.vertices, extra_axes=[(ex, ey), (-ey, ex)]) <= eps


# ---------------------------------------------------------------------------
# Angular order
# ---------------------------------------------------------------------------


def _half(v: Sequence[float]) -> int:
    return 0 if (v[1] > 0.0 or (v[1] == 0.0 and v[0] > 0.0)) else 1


def oriented(v1: Sequence[float], v2: Sequence[float]) -> bool:
    """Strict angular order: v1 precedes v2 counter-clockwise from the +x axis."""
    if (v1[0] == 0.0 and v1[1] == 0.0) or (v2[0] == 0.0 and v2[1] == 0.0):
        raise ZeroVector("oriented() needs nonzero vectors")
    h1 = _half(v1)
    h2 = _half(v2)
    if h1 != h2:
        return h1 < h2
    return cross(v1[0], v1[1], v2[0], v2[1]) > 0.0


def angular_cmp(v1: Sequence[float], v2: Sequence[float]) -> int:
    """Comparator form of :func:`oriented` for ``functools.cmp_to_key``."""
    if oriented(v1, v2):
        return -1
    if oriented(v2, v1):
        return 1
    return 0


# ---------------------------------------------------------------------------
# Rings (cell boundaries)
# ---------------------------------------------------------------------------


def winding_number(p: Point2, ring: Sequence[Point2]) -> int:
    wn = 0
    x, y = p
    n = len(ring)
    for k in range(n):
        x0, y0 = ring[k]
        x1, y1 = ring[(k + 1) % n]
        if y0 <= y:
            if y1 > y and (x1 - x0) * (y - y0) - (x - x0) * (y1 - y0) > 0.0:
                wn += 1
        elif y1 <= y and (x1 - x0) * (y - y0) - (x - x0) * (y1 - y0) < 0.0:
            wn -= 1
    return wn


def point_on_ring(p: Point2, ring: Sequence[Point2], eps: float) -> bool:
    n = len(ring)
    return any(point_segment_distance(p, ring[k], ring[(k + 1) % n]) <= eps for k in range(n))


def polyline_length(points: Sequence[Sequence[float]]) -> float:
    return sum(math.dist(points[k], points[k + 1]) for k in range(len(points) - 1))
