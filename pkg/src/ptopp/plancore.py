"""Planner primitives: path nodes, edge evaluation and subtree updates.

An edge is evaluated once into an :class:`EdgeEval` holding the passages it
traverses (found by the cell walk, or by checking every passage in the
"traversal" variant), its length and clearance.  Costs of a node follow from
its parent's sorted widths, length and clearance plus the edge evaluation.
"""

from __future__ import annotations

import math
from collections import deque
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .cells import CellComplex
from .costs import CostSpec, CostValue, SortedWidths, apply_cpw, is_narrow, path_cost
from .env import Scenario
from .errors import CycleDetected, EmptyIndex, OutOfBounds
from .geom import seg_seg_intersect, segment_gate_intersect
from .passages import Passage, passage_set

WALK_MODES = ("cell", "traversal", "none")
CLEARANCE_POINTS = 5


def traverse(p: Passage, x1: Sequence[float], x2: Sequence[float], eps: float = 0.0) -> bool:
    """Whether the edge ``x1 -> x2`` passes through passage ``p``."""
    if len(x1) == 3 and math.isfinite(p.h_hi):
        return segment_gate_intersect(tuple(x1), tuple(x2), p.gate, eps)
    return seg_seg_intersect(p.a, p.b, (x1[0], x1[1]), (x2[0], x2[1]), eps)


def same_cell(cx: CellComplex, cell: int, x2: Sequence[float], x1: Sequence[float]) -> bool:
    """Whether the collision-free edge ``x1 -> x2`` stays inside ``cell``."""
    c = cx.cells[cell]
    eps = cx.scenario.eps
    by_pid = {p.pid: p for p in cx.passages}
    for pid, _ in c.passage_sides:
        if traverse(by_pid[pid], x1, x2, eps):
            return False
    for pid in c.virtual_sides:
        if traverse(by_pid[pid], x1, x2, eps):
            return False
    return True


class EdgeEval:
    __slots__ = ("cell", "pids", "widths", "length", "clr", "narrow")

    def __init__(self, cell: int, pids: tuple[int, ...], widths: tuple[float, ...], length: float,
                 clr: float, narrow: int):
        self.cell = cell
        self.pids = pids
        self.widths = widths
        self.length = length
        self.clr = clr
        self.narrow = narrow

    def reversed(self, cell: int) -> "EdgeEval":
        return EdgeEval(cell, self.pids[::-1], self.widths[::-1], self.length, self.clr, self.narrow)


class PathNode:
    __slots__ = ("pos", "parent", "children", "cell", "len", "cost", "edge", "sw", "clr", "narrow", "idx")

    def __init__(self, pos: tuple[float, ...], cell: int, sw: SortedWidths, cost: CostValue, clr: float,
                 idx: int = -1):
        self.pos = pos
        self.parent: PathNode | None = None
        self.children: list[PathNode] = []
        self.cell = cell
        self.len = 0.0
        self.cost = cost
        self.edge: EdgeEval | None = None
        self.sw = sw
        self.clr = clr
        self.narrow = 0
        self.idx = idx

    @property
    def passed_widths(self) -> tuple[float, ...]:
        return self.edge.widths if self.edge is not None else ()

    def path(self) -> list["PathNode"]:
        out = []
        n: PathNode | None = self
        while n is not None:
            out.append(n)
            n = n.parent
        return out[::-1]

    def __repr__(self) -> str:
        return f"PathNode({self.idx}, {self.pos}, cell={self.cell}, cost={self.cost})"


class Context:
    """Everything the primitives need about one planning problem."""

    def __init__(self, scenario: Scenario, passages: Sequence[Passage], cells: CellComplex | None,
                 spec: CostSpec, walk: str = "cell"):
        if walk not in WALK_MODES:
            raise ValueError(f"unknown walk mode {walk!r}")
        self.scenario = scenario
        self.passages = list(passages)
        self.cells = cells
        self.spec = spec
        self.bar = scenario.diagonal
        self.dims = scenario.dims
        self.needs_walk = spec.uses_widths or spec.cpw_eps is not None
        self.walk = walk if self.needs_walk else "none"
        if self.walk == "cell" and cells is None:
            raise ValueError("cell walk needs a cell complex")
        n = max((p.pid for p in self.passages), default=-1) + 1
        self.width = [0.0] * n
        for p in self.passages:
            self.width[p.pid] = p.width
        self.pset = passage_set(self.passages, scenario.eps) if self.walk == "traversal" else None
        self.walker = cells.walker if cells is not None else None
        self.polyset = scenario.polyset
        self.path_primary = spec.uses_widths and spec.kind != "lensum"
        self.need_clr = spec.kind == "maxclr"

    # -- geometry ---------------------------------------------------------
    def free(self, a: Sequence[float], b: Sequence[float]) -> bool:
        if self.dims == 3:
            return self.polyset.segment_free3(a[0], a[1], a[2], b[0], b[1], b[2])
        return self.polyset.segment_free(a[0], a[1], b[0], b[1])

    def point_clearance(self, x: Sequence[float]) -> float:
        if self.dims == 3:
            return self.polyset.clearance3(x[0], x[1], x[2])
        return self.polyset.clearance(x[0], x[1])

    def edge_clearance(self, a: Sequence[float], b: Sequence[float]) -> float:
        best = math.inf
        k = CLEARANCE_POINTS - 1
        for i in range(CLEARANCE_POINTS):
            t = i / k
            best = min(best, self.point_clearance([a[d] + t * (b[d] - a[d]) for d in range(len(a))]))
        return best

    def locate(self, x: Sequence[float]) -> int:
        if self.walk != "cell":
            return -1
        return self.cells.locate(x)

    # -- nodes --------------------------------------------------------------
    def root(self, x: Sequence[float], idx: int = 0) -> PathNode:
        sw = SortedWidths.initial(self.spec.dim, self.bar)
        clr = self.point_clearance(x) if self.need_clr else math.inf
        node = PathNode(tuple(float(v) for v in x), self.locate(x), sw, path_cost(self.spec, sw, 0.0, clr), clr, idx)
        return node

    def evaluate(self, x1: PathNode, x2: Sequence[float]) -> EdgeEval:
        """Walk the (collision-free) edge from node ``x1`` to point ``x2``."""
        a = x1.pos
        length = math.dist(a, x2)
        clr = self.edge_clearance(a, x2) if self.need_clr else math.inf
        if self.walk == "none":
            return EdgeEval(-1, (), (), length, clr, 0)
        if self.walk == "cell":
            if self.dims == 3:
                cell, pids = self.walker.walk3(x1.cell, a[0], a[1], a[2], x2[0], x2[1], x2[2])
            else:
                cell, pids = self.walker.walk(x1.cell, a[0], a[1], x2[0], x2[1])
            if cell < 0:
                raise OutOfBounds("edge leaves the cell complex")
        elif self.dims == 3:
            cell, pids = -1, self.pset.crossings3(a[0], a[1], a[2], x2[0], x2[1], x2[2])
        else:
            cell, pids = -1, self.pset.crossings(a[0], a[1], x2[0], x2[1])
        spec = self.spec
        raw = [self.width[p] for p in pids]
        narrow = sum(1 for w in raw if is_narrow(spec, w)) if spec.counts_narrow else 0
        ws = tuple(apply_cpw(spec, w) for w in raw) if spec.relabels else tuple(raw)
        return EdgeEval(cell, tuple(pids), ws, length, clr, narrow)

    def new_cost(self, x1: PathNode, ev: EdgeEval) -> CostValue:
        spec = self.spec
        if self.path_primary and not ev.widths:
            # no passage crossed: the width-based primary is unchanged
            return CostValue(x1.cost.primary, x1.len + ev.length)
        sw = x1.sw.extend(ev.widths) if (ev.widths and spec.uses_widths) else x1.sw
        return path_cost(spec, sw, x1.len + ev.length, min(x1.clr, ev.clr), x1.narrow + ev.narrow)

    def attach(self, parent: PathNode, node: PathNode, ev: EdgeEval) -> None:
        """Set node's edge to ``parent`` and recompute its own attributes."""
        node.parent = parent
        node.edge = ev
        node.cell = ev.cell
        self._refresh(node)

    def _refresh(self, node: PathNode) -> None:
        parent = node.parent
        ev = node.edge
        spec = self.spec
        node.len = parent.len + ev.length
        node.clr = min(parent.clr, ev.clr)
        node.narrow = parent.narrow + ev.narrow
        if self.path_primary and not ev.widths:
            node.sw = parent.sw
            node.cost = CostValue(parent.cost.primary, node.len)
            return
        node.sw = parent.sw.extend(ev.widths) if (ev.widths and spec.uses_widths) else parent.sw
        node.cost = path_cost(spec, node.sw, node.len, node.clr, node.narrow)

    def subtree_update(self, x1: PathNode, x2: PathNode, ev: EdgeEval) -> None:
        """Make ``x1`` the parent of ``x2`` and refresh all of x2's descendants."""
        a = x1
        while a is not None:
            if a is x2:
                raise CycleDetected("new parent is a descendant of the node")
            a = a.parent
        old = x2.parent
        if old is not None:
            old.children.remove(x2)
        x1.children.append(x2)
        self.attach(x1, x2, ev)
        queue = deque(x2.children)
        while queue:
            n = queue.popleft()
            self._refresh(n)
            queue.extend(n.children)

    def replay(self, path: Sequence[Sequence[float]]) -> tuple[tuple[int, ...], list[float]]:
        """Traversed passage ids and raw widths along a polyline."""
        if len(path) < 2:
            return (), []
        if self.cells is not None:
            cell = self.cells.locate(path[0])
            pids: list[int] = []
            for a, b in zip(path, path[1:]):
                cell, crossed = self.cells.walk(cell, a, b)
                pids.extend(crossed)
        else:
            ps = self.pset or passage_set(self.passages, self.scenario.eps)
            pids = []
            for a, b in zip(path, path[1:]):
                pids.extend(ps.crossings3(*a, *b) if self.dims == 3 else ps.crossings(a[0], a[1], b[0], b[1]))
        return tuple(pids), [self.width[p] for p in pids]


class NodeIndex:
    """Exact nearest and radius queries over a growing point set.

    A kd-tree covers the first ``2**k`` points; later points are scanned
    linearly until the count doubles and the tree is rebuilt.
    """

    def __init__(self, dims: int, capacity: int = 1024):
        self.dims = dims
        self._pts = np.empty((capacity, dims))
        self.n = 0
        self._tree: cKDTree | None = None
        self._tree_n = 0

    def __len__(self) -> int:
        return self.n

    def add(self, x: Sequence[float]) -> int:
        if self.n == len(self._pts):
            self._pts = np.concatenate([self._pts, np.empty_like(self._pts)])
        self._pts[self.n] = x
        self.n += 1
        if self.n >= 2 * max(self._tree_n, 16):
            self._tree = cKDTree(self._pts[: self.n].copy())
            self._tree_n = self.n
        return self.n - 1

    def nearest(self, x: Sequence[float]) -> int:
        if self.n == 0:
            raise EmptyIndex("no nodes to search")
        best, bd = -1, math.inf
        if self._tree is not None:
            d, i = self._tree.query(x)
            best, bd = int(i), float(d)
        if self.n > self._tree_n:
            tail = self._pts[self._tree_n : self.n]
            d2 = np.sqrt(((tail - np.asarray(x)) ** 2).sum(axis=1))
            k = int(np.argmin(d2))
            if d2[k] < bd or (d2[k] == bd and self._tree_n + k < best):
                best = self._tree_n + k
        return best

    def near(self, x: Sequence[float], r: float) -> list[int]:
        """Indices of points within distance ``r`` (inclusive), ascending."""
        if self.n == 0:
            raise EmptyIndex("no nodes to search")
        out: list[int] = []
        if self._tree is not None:
            out = self._tree.query_ball_point(x, r)
        if self.n > self._tree_n:
            tail = self._pts[self._tree_n : self.n]
            d2 = np.sqrt(((tail - np.asarray(x)) ** 2).sum(axis=1))
            out = list(out) + (np.nonzero(d2 <= r)[0] + self._tree_n).tolist()
        return sorted(out)

    def points(self) -> np.ndarray:
        return self._pts[: self.n]

