import heapq
import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from ptopp.bench import corners
from ptopp.cells import compound_cells_3d, detect_cells
from ptopp.costs import CostSpec
from ptopp.env import GenSpec, Scenario, generate, walls_to_obstacles
from ptopp.errors import InObstacle, NoPathFound
from ptopp.passages import detect_2d, detect_3d
from ptopp.planners import (
    PlanConfig,
    Roadmap,
    connection_radius,
    gamma_constant,
    plan,
    prm_star,
    replay_path,
    require_path,
    rrt_star,
    run_baseline,
)
from ptopp.scenarios import corridor_scenario, tradeoff_scenario


@pytest.fixture(scope="module")
def empty():
    s = walls_to_obstacles(Scenario(2, (1000, 600), ()))
    ps = detect_2d(s)
    return s, ps, detect_cells(ps, s)


def _valid(s, path):
    for a, b in zip(path, path[1:]):
        n = max(1, int(math.ceil(math.dist(a, b))))
        for k in range(n + 1):
            t = k / n
            assert s.is_free(tuple(a[i] + t * (b[i] - a[i]) for i in range(len(a))))


def test_empty_map_straight_line(empty):
    s, ps, cx = empty
    x0, xg = (100.0, 100.0), (900.0, 500.0)
    r = rrt_star(s, ps, cx, PlanConfig(x0, xg, CostSpec("shortest"), samples=2000, seed=0))
    assert r.ok
    assert r.length <= 1.05 * math.dist(x0, xg)
    assert r.path[0] == x0 and r.path[-1] == xg


def test_prm_direct_edge(empty):
    s, ps, cx = empty
    x0, xg = (100.0, 100.0), (300.0, 100.0)
    r = prm_star(s, ps, cx, PlanConfig(x0, xg, CostSpec("shortest"), planner="prm", samples=50, seed=0))
    assert r.path == [x0, xg]


def test_determinism(world40):
    s, ps, cx = world40
    x0, xg = corners(s)
    cfg = PlanConfig(x0, xg, CostSpec("gpw"), samples=800, seed=4)
    a, b = rrt_star(s, ps, cx, cfg), rrt_star(s, ps, cx, cfg)
    assert a.to_dict() == b.to_dict()
    assert [(n, c.primary, c.len) for n, c in a.trace] == [(n, c.primary, c.len) for n, c in b.trace]


@pytest.mark.parametrize("kind", ["gpw", "mpw", "shortest", "maxclr"])
def test_result_consistency(world40, kind):
    s, ps, cx = world40
    x0, xg = corners(s)
    r = require_path(rrt_star(s, ps, cx, PlanConfig(x0, xg, CostSpec(kind), samples=1500, seed=1)))
    _valid(s, r.path)
    pids, sw, fp = replay_path(r.path, ps, cx, s, 3)
    assert pids == r.passages and sw == r.p_sigma and fp == r.f_p
    prims = [c.primary for _, c in r.trace]
    assert all(b <= a for a, b in zip(prims, prims[1:]))
    if kind == "mpw":
        widths = {p.width for p in ps}
        assert len(set(prims)) <= len(widths) + 1
        assert set(prims) <= {-w for w in widths} | {-s.diagonal}


def test_mpw_beats_shortest_bottleneck(world40):
    s, ps, cx = world40
    x0, xg = corners(s)
    for seed in range(3):
        cfg = PlanConfig(x0, xg, samples=1500, seed=seed)
        m = plan(s, ps, cx, replace(cfg, cost=CostSpec("mpw")))
        sh = run_baseline("shortest", s, ps, cx, cfg)
        assert m.f_p >= sh.f_p


def test_tradeoff_scene_mpw():
    s, d = tradeoff_scenario()
    ps = detect_2d(s)
    cx = detect_cells(ps, s)
    by_key = {p.key: p for p in ps}
    wide, narrow, second = by_key[(1, 2)].pid, by_key[(0, 1)].pid, by_key[(3, 4)].pid
    r = rrt_star(s, ps, cx, PlanConfig(d["x0"], d["xg"], CostSpec("mpw"), samples=3000, seed=0))
    assert r.ok and r.f_p == 40.0
    assert second in r.passages
    # the tree keeps the wide-gap prefix at the midpoint; both routes tie on f_p after the second barrier
    assert wide in r.passages and narrow not in r.passages
    _, _, fp_b = replay_path(d["via_b"] + d["tail"][1:], ps, cx, s, 1)
    assert fp_b == r.f_p


def test_prm_shortest_equals_dijkstra(world20):
    s, ps, cx = world20
    x0, xg = corners(s)
    rm = Roadmap(s, 600, seed=2)
    r = prm_star(s, ps, cx, PlanConfig(x0, xg, CostSpec("shortest"), planner="prm", samples=600, seed=2), rm)
    n = rm.n
    pos = list(rm.points) + [x0, xg]
    rows, cols, w = [], [], []
    for u, nb in enumerate(rm.adj):
        for v in nb:
            rows.append(u), cols.append(v), w.append(math.dist(pos[u], pos[v]))
    for end, k in ((n, x0), (n + 1, xg)):
        for v in rm.attach(k):
            rows += [end, v]
            cols += [v, end]
            w += [math.dist(k, pos[v])] * 2
    if s.segment_free(x0, xg):
        rows += [n, n + 1]
        cols += [n + 1, n]
        w += [math.dist(x0, xg)] * 2
    g = csr_matrix((w, (rows, cols)), shape=(n + 2, n + 2))
    dist = dijkstra(g, indices=n)[n + 1]
    assert r.length == pytest.approx(dist, rel=1e-9)


def test_gpw_lex_not_smaller_than_mpw(world40):
    s, ps, cx = world40
    x0, xg = corners(s)
    for seed in range(3):
        rm = Roadmap(s, 1500, seed)
        cfg = PlanConfig(x0, xg, planner="prm", samples=1500, seed=seed)
        g = plan(s, ps, cx, replace(cfg, cost=CostSpec("gpw")), rm)
        m = plan(s, ps, cx, replace(cfg, cost=CostSpec("mpw")), rm)
        assert g.f_p == m.f_p


def test_cpw_penalty_counts(world40):
    s, ps, cx = world40
    x0, xg = corners(s)
    for seed in range(3):
        rm = Roadmap(s, 1500, seed)
        cfg = PlanConfig(x0, xg, planner="prm", samples=1500, seed=seed)
        base = run_baseline("shortest", s, ps, cx, cfg, rm)
        pen = plan(s, ps, cx, replace(cfg, cost=CostSpec("shortest", cpw_eps=60, cpw_mode="penalty")), rm)
        count = lambda r: sum(w <= 60 for w in r.widths)
        assert count(pen) <= count(base)


def test_clearance_starvation(world20):
    s, ps, cx = world20
    x0, xg = corners(s)
    r = run_baseline("clearance", s, ps, cx, PlanConfig(x0, xg, samples=100, seed=0), clearance=5000)
    assert r.status == "starved" and not r.ok
    with pytest.raises(NoPathFound):
        require_path(r)


def test_clearance_baseline_respects_floor(world20):
    s, ps, cx = world20
    x0, xg = corners(s)
    r = run_baseline("clearance", s, ps, cx, PlanConfig(x0, xg, samples=1500, seed=0), clearance=10)
    assert r.ok
    assert all(s.clearance(p) >= 10 for p in r.path[1:-1])


def test_maxclr_corridor():
    s = corridor_scenario(80)
    ps = detect_2d(s)
    cx = detect_cells(ps, s)
    r = run_baseline("maxclr", s, ps, cx, PlanConfig((50.0, 300.0), (950.0, 300.0), samples=2000, seed=0))
    assert r.ok
    assert min(s.clearance(p) for p in r.path) >= 80 / 2 - 50 / 2


def test_endpoint_errors(world20):
    s, ps, cx = world20
    inside = s.regular[0].centroid
    with pytest.raises(InObstacle):
        rrt_star(s, ps, cx, PlanConfig(inside, (10.0, 10.0)))
    with pytest.raises(ValueError):
        PlanConfig((0, 0), (1, 1), planner="nope")


def test_radius():
    s = walls_to_obstacles(Scenario(2, (1000, 600), ()))
    g = gamma_constant(s)
    assert connection_radius(g, 1, 2) == math.inf
    assert connection_radius(g, 1000, 2) < connection_radius(g, 100, 2)


def test_3d_plan():
    s = generate(GenSpec(m=20, dims=3, seed=1))
    ps = detect_3d(s)
    cx = compound_cells_3d(ps, s)
    x0, xg = corners(s)
    for planner in ("rrt", "prm"):
        r = plan(s, ps, cx, PlanConfig(x0, xg, CostSpec("gpw"), planner=planner, samples=1500, seed=0))
        assert r.ok
        _valid(s, r.path)
        pids, sw, _ = replay_path(r.path, ps, cx, s, 3)
        assert pids == r.passages and sw == r.p_sigma


def test_traversal_walk_same_result(world20):
    s, ps, cx = world20
    x0, xg = corners(s)
    cfg = PlanConfig(x0, xg, CostSpec("gpw"), samples=800, seed=3)
    a = rrt_star(s, ps, cx, cfg)
    b = rrt_star(s, ps, cx, replace(cfg, walk="traversal"))
    assert a.path == b.path and a.label + "+traversal" == b.label
