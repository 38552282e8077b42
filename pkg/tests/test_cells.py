import json
import math

import numpy as np
import pytest

from ptopp import oracle
from ptopp.cells import compound_cells_3d, detect_cells, locate
from ptopp.env import GenSpec, Obstacle, Scenario, generate, walls_to_obstacles
from ptopp.errors import InObstacle, OutOfBounds
from ptopp.geom import rectangle, ring_centroid
from ptopp.passages import detect_2d, detect_3d

TRIANGLE = [(300, 200, 340, 240), (500, 200, 540, 240), (400, 350, 440, 390)]


def _scene(rects, walls):
    s = Scenario(2, (1000, 600), tuple(Obstacle(k, rectangle(*r)) for k, r in enumerate(rects)))
    return walls_to_obstacles(s) if walls else s


def test_triangle_one_interior_cell():
    s = _scene(TRIANGLE, walls=False)
    ps = detect_2d(s)
    cx = detect_cells(ps, s)
    assert len(ps) == 3
    assert len(cx.cells) == 1
    assert cx.locate((420, 260)) == 0


def test_triangle_with_walls():
    s = _scene(TRIANGLE, walls=True)
    ps = detect_2d(s)
    cx = detect_cells(ps, s)
    assert len(cx.cells) == 5
    assert sum(c.area for c in cx.cells) == pytest.approx(600000 - 3 * 1600)
    assert oracle.cell_invariants(cx) is None


def test_known_cell_and_boundary_tie():
    s = _scene(TRIANGLE, walls=True)
    ps = detect_2d(s)
    cx = detect_cells(ps, s)
    for c in cx.cells:
        if not c.rings[1:]:
            x = ring_centroid(c.rings[0])
            if s.is_free(x) and oracle._inside(c, x):
                assert cx.locate(x) == c.id
    p = ps[0]
    assert cx.locate(p.midpoint) == min(cx.passage_cells[p.pid])


@pytest.mark.parametrize("m,seed", [(20, 0), (40, 1), (80, 2), (120, 3)])
def test_invariants_random(m, seed):
    s = generate(GenSpec(m=m, seed=seed))
    cx = detect_cells(detect_2d(s), s)
    assert oracle.cell_invariants(cx, points=1000, seed=seed) is None


def test_partition_ten_thousand_points(world40):
    s, ps, cx = world40
    assert oracle.cell_invariants(cx, points=10_000, seed=7) is None


def test_adjacency_symmetry(world40):
    _, _, cx = world40
    for c in cx.cells:
        for pid, nb in c.passage_sides:
            assert (pid, c.id) in cx.cells[nb].passage_sides


def test_face_totality(world40):
    # every passage is a side of exactly two distinct cells, once each
    _, ps, cx = world40
    uses = {}
    for c in cx.cells:
        for pid, _ in c.passage_sides:
            uses.setdefault(pid, []).append(c.id)
    assert sorted(uses) == sorted(p.pid for p in ps)
    assert all(len(v) == 2 and v[0] != v[1] for v in uses.values())


def test_cell_passage_ratio():
    ratios = []
    for m in (40, 80, 160):
        for seed in range(3):
            s = generate(GenSpec(m=m, seed=seed))
            ps = detect_2d(s)
            ratios.append(len(detect_cells(ps, s).cells) / len(ps))
    assert 0.4 <= np.mean(ratios) <= 0.65


def test_locate_errors(world40):
    s, _, cx = world40
    with pytest.raises(OutOfBounds):
        locate(cx, (-5, 10))
    inside = s.regular[0].centroid
    with pytest.raises(InObstacle):
        locate(cx, inside)


def test_json(world20, tmp_path):
    _, _, cx = world20
    doc = cx.to_json()
    assert {"id", "passage_sides", "virtual_sides", "vertices"} <= set(doc[0])
    path = tmp_path / "cells.json"
    path.write_text(json.dumps(doc))
    assert oracle.compare_cell_json(json.loads(path.read_text()), json.loads(json.dumps(doc))) is None
    doc[1]["passage_sides"][0]["neighbor"] += 1
    assert oracle.compare_cell_json(doc, json.loads(json.dumps(cx.to_json())))["id"] == 1


def test_3d_equal_heights_no_virtual_sides():
    s = generate(GenSpec(m=20, dims=3, seed=3, height_range=(150, 150)))
    ps = detect_3d(s)
    cx = compound_cells_3d(ps, s)
    free = [c for c in cx.cells if not c.is_obstacle_cell]
    base = detect_cells(detect_2d(s), s)
    assert len(free) == len(base.cells)
    assert sorted(c.obstacle for c in cx.cells if c.is_obstacle_cell) == [o.id for o in s.regular]
    assert all(not c.virtual_sides for c in cx.cells)


def test_3d_midair_passage_hosted():
    rects = [(100, 100, 150, 300), (400, 100, 450, 300), (260, 150, 290, 250)]
    obs = tuple(Obstacle(k, rectangle(*r), h) for k, (r, h) in enumerate(zip(rects, (300, 300, 100))))
    s = walls_to_obstacles(Scenario(3, (1000, 600, 400), obs))
    ps = detect_3d(s)
    cx = compound_cells_3d(ps, s)
    mid = [p for p in ps if p.midair]
    assert [p.key for p in mid] == [(0, 1)]
    hosts = [c.id for c in cx.cells if mid[0].pid in c.virtual_sides]
    assert hosts
    # the projection crosses the short blocker's footprint, so its obstacle cell hosts it
    assert any(cx.cells[h].is_obstacle_cell and cx.cells[h].obstacle == 2 for h in hosts)


def test_3d_random_hosting():
    for seed in range(3):
        s = generate(GenSpec(m=40, dims=3, seed=seed))
        ps = detect_3d(s)
        cx = compound_cells_3d(ps, s)
        hosted = {pid for c in cx.cells for pid in c.virtual_sides}
        assert {p.pid for p in ps if p.midair} <= hosted
