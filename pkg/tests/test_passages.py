import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse.csgraph import floyd_warshall
from scipy.spatial import Delaunay

from ptopp.env import GenSpec, Obstacle, Scenario, generate, walls_to_obstacles
from ptopp.errors import DegenerateInput
from ptopp.geom import point_obstacle_distance, rectangle
from ptopp.passages import (
    ProximityGraph,
    brute_force_detect,
    delaunay,
    delaunay_strict,
    detect_2d,
    detect_3d,
    gabriel_test,
    gabriel_valid,
    neighbors_within,
    to_json,
)
from ptopp import oracle


def _scene(rects, heights=None, extent=(1000.0, 600.0)):
    dims = 3 if heights is not None else 2
    if dims == 3 and len(extent) == 2:
        extent = extent + (400.0,)
    obs = tuple(Obstacle(k, rectangle(*r), heights[k] if heights else math.inf) for k, r in enumerate(rects))
    return Scenario(dims, extent, obs)


def test_two_obstacles():
    s = _scene([(100, 100, 200, 200), (300, 100, 400, 200)])
    ps = detect_2d(s)
    assert len(ps) == 1
    assert ps[0].width == pytest.approx(100)
    assert len(brute_force_detect(s)) == 1


def test_collinear_blocking():
    s = _scene([(100, 100, 150, 150), (200, 100, 250, 150), (300, 100, 350, 150)])
    keys = sorted(p.key for p in detect_2d(s))
    assert keys == [(0, 1), (1, 2)]


def test_fig3_like_blocking():
    # obstacle 2 sits inside the disc on the (0, 1) closest segment
    s = _scene([(100, 100, 150, 300), (400, 100, 450, 300), (260, 120, 290, 140)])
    assert not gabriel_valid(s, 0, 1, [2])
    assert gabriel_valid(s, 0, 1, [])
    assert (0, 1) not in {p.key for p in detect_2d(s)}


def test_empty_map_with_walls():
    s = walls_to_obstacles(Scenario(2, (1000, 600), ()))
    ps = brute_force_detect(s)
    assert {p.key for p in detect_2d(s)} == {p.key for p in ps}
    # adjacent slabs touch at the corners; the side walls' disc reaches past the
    # top and bottom slabs and the top/bottom region touches the side slabs
    assert ps == []
    s2 = walls_to_obstacles(Scenario(2, (1000, 600), (Obstacle(0, rectangle(480, 280, 520, 320)),)))
    keys = {p.key for p in detect_2d(s2)}
    assert keys == {p.key for p in brute_force_detect(s2)}
    assert keys == {(0, 1), (0, 2), (0, 3), (0, 4)}


def test_delaunay_basic():
    g = delaunay([(0, 0), (1, 0), (0, 1)])
    assert g.edges() == [(0, 1), (0, 2), (1, 2)]
    with pytest.raises(DegenerateInput):
        delaunay_strict([(0, 0), (1, 1)])
    sq = delaunay([(0, 0), (1, 0), (1, 1), (0, 1)])
    assert len(sq.edges()) == 5


def test_delaunay_empty_circumcircle():
    rng = np.random.default_rng(0)
    pts = rng.uniform(0, 100, (100, 2))
    tri = Delaunay(pts)
    g = delaunay(pts)
    edges = set(g.edges())
    for simplex in tri.simplices:
        a, b, c = pts[simplex]
        for i, j in ((0, 1), (1, 2), (0, 2)):
            assert (min(simplex[i], simplex[j]), max(simplex[i], simplex[j])) in edges
        d = 2 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
        ux = ((a @ a) * (b[1] - c[1]) + (b @ b) * (c[1] - a[1]) + (c @ c) * (a[1] - b[1])) / d
        uy = ((a @ a) * (c[0] - b[0]) + (b @ b) * (a[0] - c[0]) + (c @ c) * (b[0] - a[0])) / d
        r = math.dist((ux, uy), a)
        dists = np.hypot(pts[:, 0] - ux, pts[:, 1] - uy)
        assert (dists >= r - 1e-7).all()


def test_neighbors_path_graph():
    g = ProximityGraph(np.zeros((3, 2)), np.array([0, 1, 3, 4]), np.array([1, 0, 2, 1]))
    assert neighbors_within(g, 0, 2) == {1, 2}
    assert neighbors_within(g, 0, 1) == {1}


@settings(max_examples=30)
@given(st.integers(0, 10**6), st.integers(3, 40), st.integers(1, 4))
def test_neighbors_vs_floyd_warshall(seed, n, k):
    pts = np.random.default_rng(seed).uniform(0, 100, (n, 2))
    g = delaunay(pts)
    dist = floyd_warshall(g.matrix, unweighted=True)
    rptr, ridx = g.reach(k)
    for i in range(n):
        want = {j for j in range(n) if j != i and dist[i, j] <= k}
        assert neighbors_within(g, i, k) == want
        assert set(ridx[rptr[i]:rptr[i + 1]].tolist()) - {i} == want


@pytest.mark.parametrize("m", [40, 80])
def test_detect_matches_brute_force(m):
    for seed in range(5):
        s = generate(GenSpec(m=m, seed=100 + seed, walls=False))
        assert oracle.compare_passages(s) is None


def test_subset_of_brute_force(world40):
    s, ps, _ = world40
    bf = {p.key for p in brute_force_detect(s)}
    assert {p.key for p in ps} <= bf


def test_passage_invariants(world40):
    s, ps, _ = world40
    for p in ps:
        assert p.i < p.j and p.width > 0
        assert math.dist(p.a, p.b) == pytest.approx(p.width)
        assert point_obstacle_distance(p.a, s.obstacles[p.i].footprint) < 1e-7
        assert point_obstacle_distance(p.b, s.obstacles[p.j].footprint) < 1e-7
        # the open segment stays clear of every obstacle interior
        for t in (0.25, 0.5, 0.75):
            x = (p.a[0] + t * (p.b[0] - p.a[0]), p.a[1] + t * (p.b[1] - p.a[1]))
            assert s.is_free(x)


def test_json_shape(world20):
    _, ps, _ = world20
    d = to_json(ps)[0]
    assert set(d) == {"i", "j", "seg", "width", "region"}


def test_3d_short_blocker_raises_floor():
    # tall pair with a short blocker between them
    s = _scene([(100, 100, 150, 300), (400, 100, 450, 300), (260, 150, 290, 250)], heights=[300, 300, 100])
    ps = {p.key: p for p in detect_3d(s)}
    p = ps[(0, 1)]
    assert p.h_lo == pytest.approx(100) and p.h_hi == pytest.approx(300)
    assert p.midair
    ok, lo = gabriel_test(s, 0, 1, [2])
    assert ok and lo == pytest.approx(100)


def test_3d_equal_heights_reduce_to_2d():
    s = generate(GenSpec(m=30, dims=3, seed=1, height_range=(200, 200), walls=False))
    p3 = detect_3d(s)
    p2 = detect_2d(s)
    assert {p.key for p in p3} == {p.key for p in p2}
    assert all(p.h_lo == 0 and p.h_hi == 200 for p in p3)


def test_3d_interval_invariants():
    for seed in range(3):
        s = generate(GenSpec(m=30, dims=3, seed=seed))
        for p in detect_3d(s):
            assert p.h_lo < p.h_hi
            assert p.h_hi == min(s.obstacles[p.i].height, s.obstacles[p.j].height)


def test_3d_brute_force_agrees_on_base():
    s = generate(GenSpec(m=20, dims=3, seed=4, walls=False))
    keys = {p.key for p in detect_3d(s)}
    assert {p.key for p in detect_2d(s)} <= keys
