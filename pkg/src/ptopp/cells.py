"""Gabriel cells: the faces of the planar passage graph.

Obstacles are the nodes and passages the edges.  Links around an obstacle
are ordered by the angle of their attachment point seen from the obstacle
centroid; tracing "arrive at v from u, leave by the link preceding u in v's
counter-clockwise order" walks each bounded face counter-clockwise, so the
face lies on the left of every passage segment and each obstacle arc between
two links is followed clockwise.  The four wall slabs are joined at the map
corners by zero-length contact links that close the boundary but are never
crossed.

In 3D the base cells come from the passages with a zero lower height, every
obstacle footprint becomes a cell of its own, and each midair passage is
attached as a virtual side to every cell its projection visits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cmp_to_key
from typing import Sequence

import numpy as np

from . import _kernels
from .env import Scenario
from .errors import InconsistentGraph, InObstacle, OutOfBounds
from .geom import Point2, angular_cmp, cross, signed_area, winding_number
from .passages import Passage

MAX_STEPS_FACTOR = 4


@dataclass(frozen=True)
class Side:
    """Straight piece of a cell boundary.

    Passage sides are stored as ``(p.a, p.b)`` in every cell that has them and
    arc pieces in the obstacle's counter-clockwise direction, so that twin
    sides of neighbouring cells are bitwise identical.
    """

    kind: int
    a: Point2
    b: Point2
    pid: int
    neighbor: int
    obstacle: int = -1


@dataclass
class GabrielCell:
    id: int
    rings: list[list[Point2]]
    boundary: list[tuple[str, int]]
    sides: list[Side]
    passage_sides: list[tuple[int, int]] = field(default_factory=list)
    virtual_sides: list[int] = field(default_factory=list)
    is_obstacle_cell: bool = False
    obstacle: int = -1

    @property
    def vertices(self) -> list[Point2]:
        return self.rings[0]

    @property
    def area(self) -> float:
        return sum(signed_area(r) for r in self.rings)

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "passage_sides": [{"pid": p, "neighbor": n} for p, n in self.passage_sides],
            "virtual_sides": list(self.virtual_sides),
            "vertices": [list(v) for v in self.rings[0]],
        }
        if len(self.rings) > 1:
            d["holes"] = [[list(v) for v in r] for r in self.rings[1:]]
        if self.is_obstacle_cell:
            d["obstacle"] = self.obstacle
        return d


class CellComplex:
    """Cells of one scenario plus the kernel walker built over them."""

    def __init__(self, scenario: Scenario, passages: Sequence[Passage], cells: list[GabrielCell],
                 n_free: int):
        self.scenario = scenario
        self.passages = list(passages)
        self.cells = cells
        self.n_free = n_free
        self.passage_cells: dict[int, tuple[int, int]] = {}
        for c in cells:
            for pid, nb in c.passage_sides:
                if pid not in self.passage_cells:
                    self.passage_cells[pid] = (min(c.id, nb), max(c.id, nb))
        self.walker = _build_walker(scenario, self.passages, cells)

    @property
    def dims(self) -> int:
        return self.scenario.dims

    def __len__(self) -> int:
        return len(self.cells)

    def locate(self, x: Sequence[float]) -> int:
        return locate(self, x)

    def walk(self, cell: int, a: Sequence[float], b: Sequence[float]) -> tuple[int, tuple[int, ...]]:
        """End cell and traversed passage ids, in order, of the edge ``a -> b``."""
        if len(a) == 3 and self.dims == 3:
            end, crossed = self.walker.walk3(cell, a[0], a[1], a[2], b[0], b[1], b[2])
        else:
            end, crossed = self.walker.walk(cell, a[0], a[1], b[0], b[1])
        if end < 0:
            raise OutOfBounds("edge leaves the cell complex")
        return end, crossed

    def to_json(self) -> list[dict]:
        return [c.to_dict() for c in self.cells]

    def walker_for(self, impl):
        """The same walker built on another kernel backend module."""
        return _build_walker(self.scenario, self.passages, self.cells, impl)


# ---------------------------------------------------------------------------
# Obstacle perimeters
# ---------------------------------------------------------------------------


class _Perimeter:
    """Boundary of one obstacle split at its vertices and attachment points.

    Split points are ordered counter-clockwise by arc length from vertex 0;
    piece k runs from split point k to k + 1.
    """

    def __init__(self, verts: Sequence[Point2], attach: Sequence[Point2], eps: float):
        n = len(verts)
        cum = [0.0]
        for k in range(n):
            cum.append(cum[-1] + math.dist(verts[k], verts[(k + 1) % n]))
        entries = [(cum[k], 0, k, verts[k]) for k in range(n)]
        self.total = cum[-1]
        self.index_of: dict[Point2, int] = {}
        extra = []
        vset = set(verts)
        for p in attach:
            if p in vset or p in extra:
                continue
            extra.append(p)
        for p in extra:
            best = None
            for k in range(n):
                a, b = verts[k], verts[(k + 1) % n]
                dx, dy = b[0] - a[0], b[1] - a[1]
                den = dx * dx + dy * dy
                t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / den if den > 0 else 0.0
                t = min(1.0, max(0.0, t))
                d = math.hypot(a[0] + t * dx - p[0], a[1] + t * dy - p[1])
                if best is None or d < best[0]:
                    best = (d, k, t)
            _, k, t = best
            if math.dist(p, verts[k]) <= eps:
                entries.append((cum[k], 1, k, p))
            elif math.dist(p, verts[(k + 1) % n]) <= eps:
                entries.append((cum[k + 1] if k + 1 < n else 0.0, 1, (k + 1) % n, p))
            else:
                entries.append((cum[k] + t * (cum[k + 1] - cum[k]), 1, k, p))
        entries.sort(key=lambda e: (e[0], e[1], e[3]))
        self.points: list[Point2] = [e[3] for e in entries]
        for idx, p in enumerate(self.points):
            self.index_of.setdefault(p, idx)

    def __len__(self) -> int:
        return len(self.points)

    def piece(self, k: int) -> tuple[Point2, Point2]:
        return self.points[k], self.points[(k + 1) % len(self.points)]

    def arc_cw(self, start: int, stop: int, full: bool) -> list[int]:
        """Split-point indices walked clockwise from ``start`` to ``stop``."""
        n = len(self.points)
        out = [start]
        k = start
        if full:
            for _ in range(n):
                k = (k - 1) % n
                out.append(k)
            return out
        while k != stop:
            k = (k - 1) % n
            out.append(k)
        return out


@dataclass
class _Link:
    node: int
    other: int
    pid: int
    point: Point2
    direction: tuple[float, float]
    twin: int = -1
    slot: int = -1


def _wall_contacts(s: Scenario) -> list[tuple[int, int, Point2]]:
    walls = [o.id for o in s.obstacles if o.is_wall]
    if len(walls) != 4:
        return []
    left, right, bottom, top = walls
    w, h = s.width, s.height
    return [(left, bottom, (0.0, 0.0)), (bottom, right, (w, 0.0)),
            (right, top, (w, h)), (top, left, (0.0, h))]


def _links(s: Scenario, passages: Sequence[Passage]):
    links: list[_Link] = []

    def add(u: int, v: int, pid: int, pu: Point2, pv: Point2) -> None:
        du = (pv[0] - pu[0], pv[1] - pu[1])
        k = len(links)
        links.append(_Link(u, v, pid, pu, du))
        links.append(_Link(v, u, pid, pv, (-du[0], -du[1])))
        links[k].twin = k + 1
        links[k + 1].twin = k

    for p in passages:
        add(p.i, p.j, p.pid, p.a, p.b)
    for u, v, c in _wall_contacts(s):
        add(u, v, -1, c, c)
    return links


def _order(centroid: Point2, links: list[_Link], ids: list[int]) -> list[int]:
    def cmp(x: int, y: int) -> int:
        lx, ly = links[x], links[y]
        if lx.point == ly.point:
            c = cross(lx.direction[0], lx.direction[1], ly.direction[0], ly.direction[1])
            if c > 0:
                return -1
            if c < 0:
                return 1
            return (x > y) - (x < y)
        vx = (lx.point[0] - centroid[0], lx.point[1] - centroid[1])
        vy = (ly.point[0] - centroid[0], ly.point[1] - centroid[1])
        r = angular_cmp(vx, vy)
        return r if r else (x > y) - (x < y)

    return sorted(ids, key=cmp_to_key(cmp))


# ---------------------------------------------------------------------------
# Face tracing
# ---------------------------------------------------------------------------


@dataclass
class _Face:
    links: list[int]
    ring: list[Point2]
    arcs: list[tuple[int, int]]
    area: float


def _trace(s: Scenario, passages: Sequence[Passage]):
    eps = s.eps
    links = _links(s, passages)
    by_node: dict[int, list[int]] = {o.id: [] for o in s.obstacles}
    for k, l in enumerate(links):
        by_node[l.node].append(k)
    per: dict[int, _Perimeter] = {}
    order: dict[int, list[int]] = {}
    for o in s.obstacles:
        ids = by_node[o.id]
        per[o.id] = _Perimeter(o.footprint.vertices, [links[k].point for k in ids], eps)
        order[o.id] = _order(o.centroid, links, ids)
        for slot, k in enumerate(order[o.id]):
            links[k].slot = slot

    used = [False] * len(links)
    faces: list[_Face] = []
    for start in range(len(links)):
        if used[start]:
            continue
        seq = []
        k = start
        for _ in range(len(links) + 1):
            if used[k]:
                break
            used[k] = True
            seq.append(k)
            arrive = links[k].twin
            v = links[arrive].node
            ring = order[v]
            k = ring[(links[arrive].slot - 1) % len(ring)]
        if k != start:
            raise InconsistentGraph("edge direction not closed into a face")
        faces.append(_face(links, per, seq, eps))
    return links, per, faces


def _face(links: list[_Link], per: dict[int, _Perimeter], seq: list[int], eps: float) -> _Face:
    ring: list[Point2] = []
    arcs: list[tuple[int, int]] = []
    n = len(seq)
    for idx, k in enumerate(seq):
        arrive = links[links[k].twin]
        leave = links[seq[(idx + 1) % n]]
        v = arrive.node
        pm = per[v]
        ia = pm.index_of[arrive.point]
        il = pm.index_of[leave.point]
        if arrive is leave:
            pts = pm.arc_cw(ia, ia, True)
        elif ia == il or math.dist(arrive.point, leave.point) <= eps:
            # coincident attachments: no arc between them
            pts = [ia] if ia == il else [ia, il]
        else:
            pts = pm.arc_cw(ia, il, False)
        if len(pts) > 2 or (len(pts) == 2 and (pts[0] - pts[1]) % len(pm) == 1):
            for q in range(len(pts) - 1):
                # pieces are indexed by their counter-clockwise start point
                arcs.append((v, pts[q + 1]))
        for q in pts:
            p = pm.points[q]
            if not ring or ring[-1] != p:
                ring.append(p)
    if len(ring) > 1 and ring[0] == ring[-1]:
        ring.pop()
    return _Face(seq, ring, arcs, signed_area(ring) if len(ring) >= 3 else 0.0)


def _enclosing(point: Point2, faces: list[_Face], candidates: list[int]) -> int:
    best = -1
    for f in candidates:
        if winding_number(point, faces[f].ring) != 0:
            if best < 0 or faces[f].area < faces[best].area:
                best = f
    return best


def _build(s: Scenario, passages: Sequence[Passage], obstacle_cells: bool) -> tuple[list[GabrielCell], int]:
    links, per, faces = _trace(s, passages)
    outer = min(range(len(faces)), key=lambda f: faces[f].area) if faces else -1
    if outer >= 0 and faces[outer].area >= 0.0:
        outer = -1
    positive = [f for f, face in enumerate(faces) if face.area > 0.0 and f != outer]
    cell_of_face = {f: c for c, f in enumerate(positive)}
    face_of_link = {}
    for f, face in enumerate(faces):
        for k in face.links:
            face_of_link[k] = f
    linked = {l.node for l in links}
    # negative faces other than the outer one are holes of the smallest
    # enclosing positive face
    holes = []
    for f, face in enumerate(faces):
        if f in cell_of_face or f == outer:
            continue
        rep = s.obstacles[links[face.links[0]].node].centroid
        host = _enclosing(rep, faces, positive)
        cell_of_face[f] = cell_of_face[host] if host >= 0 else -1
        holes.append(f)

    n_free = len(positive)
    cells = [GabrielCell(c, [faces[f].ring], [], []) for c, f in enumerate(positive)]
    obstacle_index = {}
    if obstacle_cells:
        for o in s.regular:
            obstacle_index[o.id] = n_free + len(obstacle_index)
    by_pid = {p.pid: p for p in passages}

    piece_cell: dict[tuple[int, int], int] = {}
    for f in positive + holes:
        c = cell_of_face[f]
        if c < 0:
            continue
        face = faces[f]
        cell = cells[c]
        if f in holes:
            cell.rings.append(face.ring)
        for k in face.links:
            l = links[k]
            if l.pid < 0:
                continue
            nb = cell_of_face.get(face_of_link[l.twin], -1)
            p = by_pid[l.pid]
            cell.boundary.append(("P", l.pid))
            cell.boundary.append(("O", links[l.twin].node))
            cell.sides.append(Side(_kernels.KIND_PASSAGE, p.a, p.b, l.pid, nb))
            cell.passage_sides.append((l.pid, nb))
        for v, q in face.arcs:
            a, b = per[v].piece(q)
            cell.sides.append(Side(_kernels.KIND_ARC, a, b, -1, obstacle_index.get(v, -1), v))
            piece_cell[(v, q)] = c
    for o in s.regular:
        if o.id in linked:
            continue
        pm = per[o.id]
        host = _enclosing(o.centroid, faces, positive)
        if host < 0:
            continue
        c = cell_of_face[host]
        cells[c].rings.append(list(reversed(pm.points)))
        cells[c].boundary.append(("O", o.id))
        for q in range(len(pm)):
            a, b = pm.piece(q)
            cells[c].sides.append(Side(_kernels.KIND_ARC, a, b, -1, obstacle_index.get(o.id, -1), o.id))
            piece_cell[(o.id, q)] = c

    for o in s.regular if obstacle_cells else ():
        pm = per[o.id]
        sides = []
        for q in range(len(pm)):
            a, b = pm.piece(q)
            sides.append(Side(_kernels.KIND_ARC, a, b, -1, piece_cell.get((o.id, q), -1), o.id))
        cells.append(GabrielCell(obstacle_index[o.id], [list(pm.points)], [("O", o.id)], sides,
                                 is_obstacle_cell=True, obstacle=o.id))
    return cells, n_free


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def _build_walker(s: Scenario, passages: Sequence[Passage], cells: list[GabrielCell], impl=None):
    sptr = [0]
    sax, say, sbx, sby, snb, spid, skind = [], [], [], [], [], [], []
    vptr = [0]
    vpid: list[int] = []
    rptr = [0]
    rv = [0]
    rx: list[float] = []
    ry: list[float] = []
    for c in cells:
        for sd in c.sides:
            sax.append(sd.a[0])
            say.append(sd.a[1])
            sbx.append(sd.b[0])
            sby.append(sd.b[1])
            snb.append(sd.neighbor)
            spid.append(sd.pid)
            skind.append(sd.kind)
        sptr.append(len(sax))
        vpid.extend(c.virtual_sides)
        vptr.append(len(vpid))
        for ring in c.rings:
            rx.extend(p[0] for p in ring)
            ry.extend(p[1] for p in ring)
            rv.append(len(rx))
        rptr.append(len(rv) - 1)
    n = max((p.pid for p in passages), default=-1) + 1
    g = np.zeros((6, n))
    for p in passages:
        g[:, p.pid] = (p.a[0], p.a[1], p.b[0], p.b[1], p.h_lo, p.h_hi)
    f = lambda v: np.asarray(v, dtype=np.float64)
    i = lambda v: np.asarray(v, dtype=np.int64)
    impl = impl or _kernels
    return impl.CellWalker(
        i(sptr), f(sax), f(say), f(sbx), f(sby), i(snb), i(spid), i(skind), i(vptr), i(vpid),
        g[0].copy(), g[1].copy(), g[2].copy(), g[3].copy(), g[4].copy(), g[5].copy(),
        i(rptr), i(rv), f(rx), f(ry), s.eps, MAX_STEPS_FACTOR * (len(sax) + 16),
    )


def detect_cells(passages: Sequence[Passage], scenario: Scenario) -> CellComplex:
    """Gabriel cells of a 2D scenario from its (wall-inclusive) passages."""
    cells, n_free = _build(scenario, passages, False)
    return CellComplex(scenario, passages, cells, n_free)


def compound_cells_3d(passages3d: Sequence[Passage], scenario: Scenario) -> CellComplex:
    """Base cells, obstacle footprint cells and virtual sides for a 3D scenario."""
    base = [p for p in passages3d if not p.midair]
    cells, n_free = _build(scenario, base, True)
    cx = CellComplex(scenario, passages3d, cells, n_free)
    midair = [p for p in passages3d if p.midair]
    if not midair:
        return cx
    hosts: dict[int, set[int]] = {}
    for p in midair:
        m = p.midpoint
        c0 = cx.walker.locate(m[0], m[1])
        if c0 < 0:
            continue
        visited = {c0}
        for end in (p.a, p.b):
            visited.update(cx.walker.cells_along(c0, m[0], m[1], end[0], end[1]))
        visited.discard(-1)
        for c in visited:
            hosts.setdefault(c, set()).add(p.pid)
    for c, pids in hosts.items():
        cells[c].virtual_sides = sorted(pids)
    return CellComplex(scenario, passages3d, cells, n_free)


def locate(cx: CellComplex, x: Sequence[float]) -> int:
    """Lowest-id cell containing ``x`` (its base projection in 3D)."""
    s = cx.scenario
    if not (0.0 <= x[0] <= s.width and 0.0 <= x[1] <= s.height):
        raise OutOfBounds(f"point {tuple(x)} outside the map")
    if (len(x) == s.dims or s.dims == 2) and not s.is_free(x):
        raise InObstacle(f"point {tuple(x)} inside an obstacle")
    c = cx.walker.locate(float(x[0]), float(x[1]))
    if c < 0:
        raise OutOfBounds(f"point {tuple(x)} not covered by any cell")
    return c
