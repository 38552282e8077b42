"""Passage detection over Delaunay proximity graphs of obstacle centroids.

A passage joins two obstacles through their closest-point segment.  It is
valid when no third obstacle meets the disc on that segment or the passage
region (the amended Gabriel condition).  ``detect_2d`` only tests pairs and
blockers within a small geodesic distance in the centroid Delaunay graph;
``brute_force_detect`` tests every pair against every obstacle.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.spatial import Delaunay, QhullError

from . import _kernels
from .env import Scenario
from .errors import DegenerateInput
from .geom import ConvexPolygon, Gate, PassageRegion, Point2, Segment, region_from_closest

JITTER_REL = 1e-7
DEFAULT_KGD = 2


@dataclass(eq=False)
class Passage:
    """Valid passage between obstacles ``i < j``.

    ``a`` lies on obstacle i and ``b`` on obstacle j; ``width`` is their
    distance.  In 2D the height interval is ``[0, inf]``.
    """

    i: int
    j: int
    a: Point2
    b: Point2
    width: float
    h_lo: float = 0.0
    h_hi: float = math.inf
    pid: int = -1
    fi: ConvexPolygon | None = field(default=None, compare=False, repr=False)
    fj: ConvexPolygon | None = field(default=None, compare=False, repr=False)

    @property
    def key(self) -> tuple[int, int]:
        return (self.i, self.j)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Passage):
            return NotImplemented
        return (self.i, self.j, self.a, self.b, self.width, self.h_lo, self.h_hi, self.pid) == (
            other.i, other.j, other.a, other.b, other.width, other.h_lo, other.h_hi, other.pid
        )

    def __hash__(self) -> int:
        return hash((self.i, self.j, self.pid))

    @property
    def seg(self) -> Segment:
        return Segment(self.a, self.b)

    @property
    def gate(self) -> Gate:
        return Gate(self.a, self.b, self.h_lo, self.h_hi)

    @property
    def midpoint(self) -> Point2:
        return (0.5 * (self.a[0] + self.b[0]), 0.5 * (self.a[1] + self.b[1]))

    @property
    def midair(self) -> bool:
        return self.h_lo > 0.0

    @cached_property
    def region(self) -> PassageRegion:
        return region_from_closest(self.fi.vertices, self.fj.vertices, self.a, self.b, self.width)

    def to_dict(self) -> dict:
        d = {
            "i": self.i,
            "j": self.j,
            "seg": [list(self.a), list(self.b)],
            "width": self.width,
            "region": [list(p) for p in self.region.polygon],
        }
        if math.isfinite(self.h_hi):
            d["h_interval"] = [self.h_lo, self.h_hi]
        return d


# ---------------------------------------------------------------------------
# Proximity graph
# ---------------------------------------------------------------------------


class ProximityGraph:
    """Undirected graph over points stored as CSR neighbor lists."""

    def __init__(self, points: np.ndarray, indptr: np.ndarray, indices: np.ndarray):
        self.points = points
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)

    @classmethod
    def complete(cls, points: np.ndarray) -> "ProximityGraph":
        n = len(points)
        idx = [j for i in range(n) for j in range(n) if j != i]
        return cls(points, np.arange(n + 1) * max(n - 1, 0), np.array(idx, dtype=np.int64))

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @cached_property
    def adjacency(self) -> list[tuple[int, ...]]:
        ip, ix = self.indptr, self.indices
        return [tuple(sorted(int(v) for v in ix[ip[i] : ip[i + 1]])) for i in range(self.n)]

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, nb in enumerate(self.adjacency) for j in nb if i < j]

    @cached_property
    def matrix(self) -> csr_matrix:
        data = np.ones(len(self.indices), dtype=np.int32)
        return csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def reach(self, k_gd: int) -> tuple[np.ndarray, np.ndarray]:
        """Sorted CSR rows of nodes within ``k_gd`` edges (each row includes itself)."""
        return _kernels.geodesic_reach(self.indptr, self.indices, k_gd)


def jitter(ids: Sequence[int], extent: Sequence[float]) -> np.ndarray:
    """Deterministic offsets of size 1e-7 x extent derived from obstacle ids.

    Uses the additive recurrence of the plastic constant, so every id maps to
    a fixed, well-spread point of [-1, 1]^2.
    """
    ids = np.asarray(ids, dtype=np.float64) + 1.0
    g = 1.32471795724474602596
    ux = np.mod(ids / g, 1.0) * 2.0 - 1.0
    uy = np.mod(ids / (g * g), 1.0) * 2.0 - 1.0
    return np.column_stack([ux * JITTER_REL * extent[0], uy * JITTER_REL * extent[1]])


def delaunay(points: Sequence[Sequence[float]]) -> ProximityGraph:
    """Delaunay graph of the points; complete graph when fewer than 3.

    Degenerate inputs that Qhull rejects (all collinear) also fall back to the
    complete graph.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(pts) < 3:
        return ProximityGraph.complete(pts)
    try:
        tri = Delaunay(pts)
    except (QhullError, ValueError):
        return ProximityGraph.complete(pts)
    indptr, indices = tri.vertex_neighbor_vertices
    return ProximityGraph(pts, indptr, indices)


def delaunay_strict(points: Sequence[Sequence[float]]) -> ProximityGraph:
    if len(points) < 3:
        raise DegenerateInput("Delaunay graph needs at least 3 points")
    return delaunay(points)


def neighbors_within(g: ProximityGraph, i: int, k_gd: int) -> set[int]:
    """Nodes at geodesic distance 1..k_gd from i (BFS)."""
    seen = {i: 0}
    queue = deque([i])
    while queue:
        u = queue.popleft()
        if seen[u] == k_gd:
            continue
        for v in g.adjacency[u]:
            if v not in seen:
                seen[v] = seen[u] + 1
                queue.append(v)
    del seen[i]
    return set(seen)


def obstacle_graph(s: Scenario, ids: Sequence[int] | None = None) -> ProximityGraph:
    if ids is None:
        ids = range(s.m)
    ids = list(ids)
    cents = np.array([s.obstacles[k].centroid for k in ids], dtype=np.float64).reshape(-1, 2)
    return delaunay(cents + jitter(ids, s.extent))


# ---------------------------------------------------------------------------
# Detection
# ---------------------------------------------------------------------------


MODE_LIST = 0
MODE_ALL = 1
MODE_ROWS = 2


def _collect(s: Scenario, ii, jj, res) -> list[Passage]:
    """Valid pairs as passages numbered in input order (inputs sorted by (i, j))."""
    status, dd, pix, piy, pjx, pjy, hlow = res
    obs = s.obstacles
    planar = s.dims == 2
    out = []
    ii = ii.tolist() if hasattr(ii, "tolist") else list(ii)
    jj = jj.tolist() if hasattr(jj, "tolist") else list(jj)
    lo, hi = 0.0, math.inf
    for p in np.flatnonzero(np.asarray(status) == 1).tolist():
        i = ii[p]
        j = jj[p]
        oi = obs[i]
        oj = obs[j]
        if not planar:
            hi = oi.height if oi.height < oj.height else oj.height
            lo = hlow[p]
            if lo >= hi:
                continue
        out.append(Passage(i, j, (pix[p], piy[p]), (pjx[p], pjy[p]), dd[p], lo, hi, len(out), oi.footprint, oj.footprint))
    return out


def _number(ps: Iterable[Passage]) -> list[Passage]:
    ps = sorted(ps, key=lambda p: (p.i, p.j))
    for k, p in enumerate(ps):
        p.pid = k
    return ps


def _planar(s: Scenario) -> Scenario:
    """View of a 3D scenario with infinite heights (the base passage problem)."""
    if s.dims == 2:
        return s
    from .env import Obstacle

    obs = tuple(Obstacle(o.id, o.footprint, math.inf, o.is_wall) for o in s.obstacles)
    return Scenario(2, s.extent[:2], obs, s.walls, s.seed)


def detect_2d(s: Scenario, k_gd: int = DEFAULT_KGD) -> list[Passage]:
    """Pairs within geodesic distance k_gd, tested against N_i(k_gd) and N_j(k_gd).

    Heights are ignored: a 3D scenario yields its base passage set.
    """
    s = _planar(s)
    if s.m < 2:
        return []
    g = obstacle_graph(s)
    rptr, ridx = g.reach(k_gd)
    rows = np.repeat(np.arange(s.m), np.diff(rptr))
    mask = rows < ridx
    ii = rows[mask]
    jj = ridx[mask]
    res = s.polyset.check_pairs(ii, jj, rptr, ridx, MODE_ROWS)
    return _collect(s, ii, jj, res)


def brute_force_detect(s: Scenario) -> list[Passage]:
    """Every pair against every other obstacle (heights respected in 3D)."""
    m = s.m
    if m < 2:
        return []
    ii, jj = np.triu_indices(m, 1)
    ii = ii.astype(np.int64)
    jj = jj.astype(np.int64)
    res = s.polyset.check_pairs(ii, jj, np.zeros(1, np.int64), np.zeros(0, np.int64), MODE_ALL)
    return _collect(s, ii, jj, res)


def gabriel_test(s: Scenario, i: int, j: int, testers: Iterable[int]) -> tuple[bool, float]:
    """Amended Gabriel condition for pair (i, j) with the given testers.

    Returns validity and the lower height bound raised by shorter blockers.
    A touching pair is never valid.
    """
    t = sorted(set(int(k) for k in testers) - {i, j})
    res = s.polyset.check_pairs(
        np.array([i], np.int64), np.array([j], np.int64), np.array([0, len(t)], np.int64), np.array(t, np.int64), MODE_LIST
    )
    status, hlow = res[0][0], res[6][0]
    if status != 1:
        return False, 0.0
    hi = min(s.obstacles[i].height, s.obstacles[j].height)
    lo = hlow if math.isfinite(hi) else 0.0
    return lo < hi, lo


def gabriel_valid(s: Scenario, i: int, j: int, testers: Iterable[int]) -> bool:
    return gabriel_test(s, i, j, testers)[0]


def detect_3d(s: Scenario, k_gd: int = DEFAULT_KGD) -> list[Passage]:
    """Spatial passages by insertion in descending height order.

    At each insertion the Delaunay graph of the inserted prefix is rebuilt
    (equivalent to incremental insertion).  Existing passages near the new
    obstacle that it blocks get their lower bound raised to its height once;
    new passages to its neighbors are tested against the prefix neighborhoods
    and start with the interval [0, h_new].  Passages whose interval empties
    are dropped.
    """
    if s.dims != 3:
        raise ValueError("detect_3d needs a 3D scenario")
    m = s.m
    if m < 2:
        return []
    obs = s.obstacles
    ps = s.polyset
    order = sorted(range(m), key=lambda k: (-obs[k].height, k))
    cents = np.array([o.centroid for o in obs], dtype=np.float64) + jitter(range(m), s.extent)
    # passage state: key -> [a, b, d, h_lo, processed]
    found: dict[tuple[int, int], list] = {}

    def test_pair(i: int, j: int, testers: Sequence[int]) -> None:
        key = (min(i, j), max(i, j))
        if key in found:
            return
        t = sorted(set(testers) - {i, j})
        res = ps.check_pairs(
            np.array([key[0]], np.int64), np.array([key[1]], np.int64),
            np.array([0, len(t)], np.int64), np.array(t, np.int64), MODE_LIST,
        )
        if res[0][0] == 1:
            found[key] = [(res[2][0], res[3][0]), (res[4][0], res[5][0]), res[1][0], 0.0, False]

    test_pair(order[0], order[1], [])
    for step in range(2, m):
        prefix = order[: step + 1]
        g = delaunay(cents[prefix])
        local = step
        ni = {prefix[v] for v in neighbors_within(g, local, k_gd)}
        new = order[step]
        hn = obs[new].height
        for key, st in found.items():
            if st[4] or not (key[0] in ni or key[1] in ni):
                continue
            if ps.blocks(key[0], key[1], new):
                st[3] = hn
                st[4] = True
        pos = {o: k for k, o in enumerate(prefix)}
        for j in sorted(ni):
            nj = {prefix[v] for v in neighbors_within(g, pos[j], k_gd)}
            test_pair(new, j, ni | nj)
    out = []
    for (i, j), (a, b, d, lo, _) in found.items():
        hi = min(obs[i].height, obs[j].height)
        if lo >= hi:
            continue
        out.append(Passage(i, j, a, b, d, lo, hi, -1, obs[i].footprint, obs[j].footprint))
    return _number(out)


def widths(ps: Sequence[Passage]) -> list[float]:
    return [p.width for p in ps]


def passage_arrays(ps: Sequence[Passage]) -> tuple[np.ndarray, ...]:
    ax = np.array([p.a[0] for p in ps], dtype=np.float64)
    ay = np.array([p.a[1] for p in ps], dtype=np.float64)
    bx = np.array([p.b[0] for p in ps], dtype=np.float64)
    by = np.array([p.b[1] for p in ps], dtype=np.float64)
    lo = np.array([p.h_lo for p in ps], dtype=np.float64)
    hi = np.array([p.h_hi for p in ps], dtype=np.float64)
    return ax, ay, bx, by, lo, hi


def passage_set(ps: Sequence[Passage], eps: float):
    """Kernel all-passage traversal checker."""
    return _kernels.PassageSet(*passage_arrays(ps), eps)


def to_json(ps: Sequence[Passage]) -> list[dict]:
    return [p.to_dict() for p in ps]
