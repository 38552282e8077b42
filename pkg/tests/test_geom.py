import math
from functools import cmp_to_key

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ptopp.errors import DegenerateRegion, GeometryError, OverlappingObstacles, ZeroVector
from ptopp.geom import (
    ConvexPolygon,
    Gate,
    Segment,
    angular_cmp,
    disc_region_obstacle_intersect,
    obstacle_distance,
    oriented,
    passage_region,
    point_in_convex,
    point_obstacle_distance,
    polyline_length,
    rectangle,
    ring_centroid,
    segment_gate_intersect,
    segments_intersect,
    shadow_contains,
    signed_area,
    square,
    winding_number,
)

coord = st.floats(-100, 100, allow_nan=False)
angle = st.floats(0, math.pi / 2)


def _boundary_samples(poly, n=10_000):
    out = []
    for a, b in poly.edges():
        t = np.linspace(0.0, 1.0, n)[:, None]
        out.append(np.asarray(a) + t * (np.asarray(b) - np.asarray(a)))
    return np.vstack(out)


def _separated_squares(seed):
    rng = np.random.default_rng(seed)
    while True:
        a = square(tuple(rng.uniform(0, 100, 2)), rng.uniform(10, 30), rng.uniform(0, math.pi / 2))
        b = square(tuple(rng.uniform(0, 100, 2)), rng.uniform(10, 30), rng.uniform(0, math.pi / 2))
        try:
            obstacle_distance(a, b)
        except OverlappingObstacles:
            continue
        return a, b


def test_polygon_validation():
    with pytest.raises(GeometryError):
        ConvexPolygon(((0, 0), (1, 0)))
    with pytest.raises(GeometryError):
        ConvexPolygon(((0, 0), (0, 1), (1, 0)))  # clockwise
    with pytest.raises(GeometryError):
        ConvexPolygon(((0, 0), (2, 0), (1, 0.0), (1, 1)))
    assert ConvexPolygon.from_points([(0, 0), (0, 1), (1, 0)]).area == pytest.approx(0.5)


def test_axis_aligned_gap():
    pi, pj, d = obstacle_distance(rectangle(0, 0, 1, 1), rectangle(2, 0, 3, 1))
    assert d == 1.0
    assert pi[0] == 1.0 and pj[0] == 2.0


def test_touching_squares_have_zero_distance():
    assert obstacle_distance(rectangle(0, 0, 1, 1), rectangle(1, 0, 2, 1)).d == 0.0
    with pytest.raises(DegenerateRegion):
        passage_region(rectangle(0, 0, 1, 1), rectangle(1, 0, 2, 1))


def test_overlap_rejected():
    with pytest.raises(OverlappingObstacles):
        obstacle_distance(rectangle(0, 0, 2, 2), rectangle(1, 1, 3, 3))


@pytest.mark.parametrize("seed", range(5))
def test_distance_matches_boundary_sampling(seed):
    a, b = _separated_squares(seed)
    pi, pj, d = obstacle_distance(a, b)
    sa = _boundary_samples(a, 2000)
    # exact distance from every sample on a to polygon b, then the minimum
    sampled = min(point_obstacle_distance(tuple(p), b) for p in sa[::7])
    sb = _boundary_samples(b, 2000)
    sampled = min(sampled, min(point_obstacle_distance(tuple(p), a) for p in sb[::7]))
    assert d <= sampled + 1e-9
    assert d == pytest.approx(sampled, abs=1e-2)
    assert math.dist(pi, pj) == pytest.approx(d, abs=1e-9)
    assert point_obstacle_distance(pi, a) < 1e-9 and point_obstacle_distance(pj, b) < 1e-9


def test_distance_dense_oracle_tight():
    a, b = _separated_squares(42)
    d = obstacle_distance(a, b).d
    dense = min(
        point_obstacle_distance(tuple(p), b) for p in _boundary_samples(a, 10_000)[::1]
    )
    dense = min(dense, min(point_obstacle_distance(tuple(p), a) for p in _boundary_samples(b, 10_000)))
    assert abs(d - dense) <= 1e-6


@given(st.integers(0, 10_000))
def test_distance_symmetric(seed):
    a, b = _separated_squares(seed)
    assert obstacle_distance(a, b).d == obstacle_distance(b, a).d


def test_region_between_facing_squares():
    r = passage_region(rectangle(0, 0, 10, 10), rectangle(20, 0, 30, 10))
    xs = sorted({round(p[0], 9) for p in r.polygon})
    ys = sorted({round(p[1], 9) for p in r.polygon})
    assert xs == [10.0, 20.0] and ys == [0.0, 10.0]


def test_region_bounded_by_smaller_shadow():
    big = rectangle(0, 0, 100, 100)
    small = rectangle(120, 40, 130, 60)
    r = passage_region(big, small)
    ys = sorted({round(p[1], 9) for p in r.polygon})
    assert ys == [40.0, 60.0]


@pytest.mark.parametrize("seed", range(5))
def test_region_inside_both_shadows(seed):
    a, b = _separated_squares(seed)
    c = obstacle_distance(a, b)
    if c.d <= 1e-9:
        return
    r = passage_region(a, b, closest=c)
    ex, ey = r.axis
    rng = np.random.default_rng(seed)
    poly = np.array(r.polygon)
    for _ in range(1000):
        w = rng.dirichlet(np.ones(4))
        p = tuple(w @ poly)
        s0 = c.pi[0] * ex + c.pi[1] * ey
        s1 = c.pj[0] * ex + c.pj[1] * ey
        assert shadow_contains(a, (ex, ey), s0, 1e4, p, 1e-7)
        assert shadow_contains(b, (-ex, -ey), -s1, 1e4, p, 1e-7)
    mid = (0.5 * (c.pi[0] + c.pj[0]), 0.5 * (c.pi[1] + c.pj[1]))
    for p in (c.pi, c.pj, mid):
        assert r.contains(p, 1e-7)


def test_segments():
    assert segments_intersect(Segment((0, 0), (1, 1)), Segment((0, 1), (1, 0)))
    assert not segments_intersect(Segment((0, 0), (1, 0)), Segment((0, 1), (1, 1)))
    assert segments_intersect(Segment((0, 0), (1, 0)), Segment((1 + 1e-12, 0), (2, 0)), eps=1e-9)
    assert not segments_intersect(Segment((0, 0), (1, 0)), Segment((1 + 1e-6, 0), (2, 0)), eps=1e-9)


@given(coord, coord, coord, coord, coord, coord, coord, coord)
def test_segments_symmetric(a, b, c, d, e, f, g, h):
    s1 = Segment((a, b), (c, d))
    s2 = Segment((e, f), (g, h))
    assert segments_intersect(s1, s2, 1e-9) == segments_intersect(s2, s1, 1e-9)


def test_gate_examples():
    gate = Gate((5, 0), (5, 1), 0, 10)
    assert segment_gate_intersect((4, 0.5, 5), (6, 0.5, 5), gate)
    assert not segment_gate_intersect((4, 0.5, 11), (6, 0.5, 11), gate)


def _clip_oracle(p, q, gate):
    # plane x = 5 crossing, then bounds on y and z
    if (p[0] - 5) * (q[0] - 5) > 0 or p[0] == q[0]:
        return None
    t = (5 - p[0]) / (q[0] - p[0])
    y = p[1] + t * (q[1] - p[1])
    z = p[2] + t * (q[2] - p[2])
    return 0 <= y <= 1 and gate.h_lo <= z <= gate.h_hi


def test_gate_random_against_clip():
    gate = Gate((5, 0), (5, 1), 2, 8)
    rng = np.random.default_rng(0)
    checked = 0
    for _ in range(5000):
        p = tuple(rng.uniform((0, -1, 0), (10, 2, 10)))
        q = tuple(rng.uniform((0, -1, 0), (10, 2, 10)))
        want = _clip_oracle(p, q, gate)
        if want is None:
            continue
        t = (5 - p[0]) / (q[0] - p[0])
        y = p[1] + t * (q[1] - p[1])
        z = p[2] + t * (q[2] - p[2])
        if min(abs(y), abs(y - 1), abs(z - 2), abs(z - 8)) < 1e-6:
            continue
        checked += 1
        assert segment_gate_intersect(p, q, gate) == want
    assert checked > 1000


def test_disc_region_blocking():
    a, mid, b = rectangle(0, 0, 10, 10), rectangle(20, 0, 30, 10), rectangle(40, 0, 50, 10)
    c = obstacle_distance(a, b)
    r = passage_region(a, b, closest=c)
    assert disc_region_obstacle_intersect(c.pi, c.pj, r, mid)
    assert not disc_region_obstacle_intersect(c.pi, c.pj, r, rectangle(200, 200, 210, 210))


def test_oriented_examples():
    assert oriented((1, 0), (0, 1))
    assert not oriented((0, 1), (1, 0))
    with pytest.raises(ZeroVector):
        oriented((0, 0), (1, 0))


def test_oriented_matches_atan2():
    rng = np.random.default_rng(1)
    vs = [tuple(v) for v in rng.normal(size=(100, 2))]
    by_cmp = sorted(vs, key=cmp_to_key(angular_cmp))
    by_atan = sorted(vs, key=lambda v: math.atan2(v[1], v[0]) % (2 * math.pi))
    assert by_cmp == by_atan


@given(st.lists(st.tuples(st.integers(-50, 50), st.integers(-50, 50)).filter(lambda v: v != (0, 0)),
                min_size=2, max_size=20, unique=True))
def test_oriented_cyclic(vs):
    # keep one vector per direction
    dirs = {}
    for v in vs:
        g = math.gcd(abs(v[0]), abs(v[1]))
        dirs.setdefault((v[0] // g, v[1] // g), v)
    vs = list(dirs.values())
    order = sorted(vs, key=cmp_to_key(angular_cmp))
    assert order == sorted(reversed(vs), key=cmp_to_key(angular_cmp))
    # rotating every vector by 90 degrees permutes the order cyclically
    rot = sorted([(-y, x) for x, y in vs], key=cmp_to_key(angular_cmp))
    mapped = [(-y, x) for x, y in order]
    k = mapped.index(rot[0])
    assert mapped[k:] + mapped[:k] == rot


def test_point_obstacle_distance():
    sq = rectangle(0, 0, 10, 10)
    assert point_obstacle_distance((5, 5), sq) == 0.0
    assert point_obstacle_distance((-3, 5), sq) == pytest.approx(3.0)
    assert point_obstacle_distance((5, 5, 20), sq, 10.0) == pytest.approx(10.0)


def test_prism_distance_sampling():
    sq = square((0, 0), 10, 0.3)
    rng = np.random.default_rng(2)
    for _ in range(20):
        x = tuple(rng.uniform((-20, -20, 0), (20, 20, 30)))
        samples = []
        for p in _boundary_samples(sq, 400):
            for z in np.linspace(0, 12, 121):
                samples.append(math.dist(x, (p[0], p[1], z)))
        cap = [math.dist(x, (p[0], p[1], 12.0)) for p in np.random.default_rng(3).uniform(-7.1, 7.1, (20000, 2))
               if point_in_convex(tuple(p), sq.vertices)]
        want = min(min(samples), min(cap))
        got = point_obstacle_distance(x, sq, 12.0)
        if got > 0:
            assert got <= want + 1e-9
            assert got == pytest.approx(want, abs=0.2)


@given(st.floats(-20, 20), st.floats(-20, 20))
def test_zero_distance_iff_inside(x, y):
    sq = square((0, 0), 10, 0.5)
    assert (point_obstacle_distance((x, y), sq) == 0.0) == point_in_convex((x, y), sq.vertices)


def test_rings_and_polylines():
    ring = [(0, 0), (4, 0), (4, 2), (0, 2)]
    assert signed_area(ring) == 8.0
    assert ring_centroid(ring) == (2.0, 1.0)
    assert winding_number((1, 1), ring) == 1
    assert winding_number((5, 1), ring) == 0
    assert polyline_length([(0, 0)]) == 0
    assert polyline_length([(0, 0), (1, 0), (1, 1), (0, 1), (0, 0)]) == 4


@given(st.lists(st.tuples(coord, coord), min_size=1, max_size=20))
def test_polyline_segment_sum(pts):
    want = sum(math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(pts, pts[1:]))
    assert polyline_length(pts) == pytest.approx(want)
