"""RRT* and PRM* over passage-aware costs, plus the comparison baselines."""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .cells import CellComplex
from .costs import CostSpec, CostValue, SortedWidths, validate_weights
from .env import Scenario
from .errors import InObstacle, NoPathFound, OutOfBounds
from .passages import Passage
from .plancore import Context, NodeIndex, PathNode

PLANNERS = ("rrt", "prm")
BASELINES = ("shortest", "clearance", "maxclr")
DEFAULT_ETA = {2: 50.0, 3: 100.0}
DEFAULT_CLEARANCE = 10.0
ATTEMPTS_PER_SAMPLE = 200
MAX_REJECTS = 100_000


@dataclass(frozen=True)
class PlanConfig:
    x0: tuple[float, ...]
    xg: tuple[float, ...]
    cost: CostSpec = field(default_factory=CostSpec)
    planner: str = "rrt"
    samples: int = 2000
    eta: float | None = None
    goal_radius: float | None = None
    seed: int = 0
    clearance_constraint: float | None = None
    z_range: tuple[float, float] | None = None
    walk: str = "cell"

    def __post_init__(self) -> None:
        if self.planner not in PLANNERS:
            raise ValueError(f"unknown planner {self.planner!r}")
        if self.eta is not None and self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.samples < 1:
            raise ValueError("samples must be positive")

    def steer_length(self, dims: int) -> float:
        return self.eta if self.eta is not None else DEFAULT_ETA[dims]


@dataclass
class PlanResult:
    status: str
    path: list[tuple[float, ...]]
    cost: CostValue | None
    p_sigma: SortedWidths | None
    passages: tuple[int, ...]
    widths: list[float]
    samples: int
    time_ms: float
    trace: list[tuple[int, CostValue]]
    radius: float
    weights_valid: bool
    label: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    @property
    def length(self) -> float:
        return self.cost.len if self.cost is not None else math.inf

    @property
    def f_p(self) -> float:
        return self.p_sigma[0] if self.p_sigma is not None else math.nan

    def to_dict(self, timing: bool = False) -> dict:
        d = {
            "status": self.status,
            "planner": self.label,
            "path": [list(p) for p in self.path],
            "cost": self.cost.primary if self.cost is not None else None,
            "len": self.cost.len if self.cost is not None else None,
            "p_sigma": list(self.p_sigma.entries) if self.p_sigma is not None else [],
            "f_p": self.f_p if self.p_sigma is not None else None,
            "passages": list(self.passages),
            "samples": self.samples,
            "weights_valid": self.weights_valid,
            "trace": [[n, c.primary] for n, c in self.trace],
        }
        if timing:
            d["time_ms"] = self.time_ms
        return d


# ---------------------------------------------------------------------------
# Shared pieces
# ---------------------------------------------------------------------------


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def gamma_constant(scenario: Scenario) -> float:
    d = scenario.dims
    mu = scenario.free_area if d == 2 else scenario.free_volume
    return 2.0 * (1.0 + 1.0 / d) ** (1.0 / d) * (mu / unit_ball_volume(d)) ** (1.0 / d)


def connection_radius(gamma: float, n: int, d: int) -> float:
    if n < 2:
        return math.inf
    return gamma * (math.log(n) / n) ** (1.0 / d)


class Sampler:
    """Uniform free-space sampler with an optional clearance floor."""

    def __init__(self, scenario: Scenario, rng: np.random.Generator, z_range=None, clearance=None):
        self.s = scenario
        self.rng = rng
        self.clearance = clearance
        lo = [0.0, 0.0]
        hi = [scenario.width, scenario.height]
        if scenario.dims == 3:
            z = z_range if z_range is not None else (0.0, scenario.extent[2])
            lo.append(float(z[0]))
            hi.append(float(z[1]))
        self.lo = np.array(lo)
        self.span = np.array(hi) - self.lo
        self.polyset = scenario.polyset

    def accept(self, x: Sequence[float]) -> bool:
        ps = self.polyset
        if len(x) == 3:
            if not ps.point_free3(x[0], x[1], x[2]):
                return False
            return self.clearance is None or ps.clearance3(x[0], x[1], x[2]) >= self.clearance
        if not ps.point_free(x[0], x[1]):
            return False
        return self.clearance is None or ps.clearance(x[0], x[1]) >= self.clearance

    def draw(self) -> tuple[float, ...]:
        """Next accepted sample; NoPathFound when the floor starves sampling."""
        for _ in range(MAX_REJECTS):
            x = tuple((self.lo + self.rng.random(len(self.lo)) * self.span).tolist())
            if self.accept(x):
                return x
        raise NoPathFound("sampling starved: no free point met the clearance constraint")


def _check_endpoints(ctx: Context, cfg: PlanConfig) -> None:
    s = ctx.scenario
    for name, x in (("start", cfg.x0), ("goal", cfg.xg)):
        if len(x) != s.dims:
            raise ValueError(f"{name} must have {s.dims} coordinates")
        if not s.in_bounds(x):
            raise OutOfBounds(f"{name} {x} outside the map")
        if not s.is_free(x):
            raise InObstacle(f"{name} {x} inside an obstacle")


def _weights_valid(ctx: Context) -> bool:
    spec = ctx.spec
    if spec.kind != "gpw":
        return True
    return validate_weights(spec.dim, spec.ratio, [p.width for p in ctx.passages] + [ctx.bar])


def replay_path(path: Sequence[Sequence[float]], passages: Sequence[Passage], cells: CellComplex | None,
                scenario: Scenario, q: int = 3) -> tuple[tuple[int, ...], SortedWidths, float]:
    """Traversed passages, sorted width vector and narrowest width of a path."""
    ctx = Context(scenario, passages, cells, CostSpec("gpw", q=q), "cell" if cells is not None else "traversal")
    pids, widths = ctx.replay(path)
    sw = SortedWidths.initial(q, scenario.diagonal).extend(widths)
    return pids, sw, sw[0]


def _result(ctx: Context, cfg: PlanConfig, end: PathNode | None, samples: int, elapsed: float,
            trace: list, radius: float, status: str | None = None) -> PlanResult:
    label = ctx.spec.label() + ("+traversal" if cfg.walk == "traversal" and ctx.needs_walk else "")
    valid = _weights_valid(ctx)
    if end is None:
        return PlanResult(status or "no_path", [], None, None, (), [], samples, elapsed * 1e3, trace, radius,
                          valid, label)
    nodes = end.path()
    path = [n.pos for n in nodes]
    # widths are reported by replaying the path so every cost family is comparable
    cells = ctx.cells if ctx.cells is not None else None
    pids, sw, _ = replay_path(path, ctx.passages, cells, ctx.scenario, ctx.spec.q)
    widths = [ctx.width[p] for p in pids]
    return PlanResult("ok", path, end.cost, sw, pids, widths, samples, elapsed * 1e3, trace, radius, valid, label)


# ---------------------------------------------------------------------------
# RRT*
# ---------------------------------------------------------------------------


def rrt_star(scenario: Scenario, passages: Sequence[Passage], cells: CellComplex | None,
             cfg: PlanConfig) -> PlanResult:
    ctx = Context(scenario, passages, cells, cfg.cost, cfg.walk)
    _check_endpoints(ctx, cfg)
    d = scenario.dims
    eta = cfg.steer_length(d)
    goal_r = cfg.goal_radius if cfg.goal_radius is not None else eta
    gamma = gamma_constant(scenario)
    rng = np.random.default_rng(cfg.seed)
    sampler = Sampler(scenario, rng, cfg.z_range, cfg.clearance_constraint)
    xg = tuple(float(v) for v in cfg.xg)

    t0 = time.perf_counter()
    root = ctx.root(cfg.x0, 0)
    nodes = [root]
    index = NodeIndex(d, max(1024, cfg.samples + 1))
    index.add(root.pos)
    goal: PathNode | None = None
    trace: list[tuple[int, CostValue]] = []
    last = None
    n_valid = 0
    radius = eta
    status = None
    attempts = 0
    max_attempts = ATTEMPTS_PER_SAMPLE * cfg.samples
    try:
        while n_valid < cfg.samples and attempts < max_attempts:
            attempts += 1
            x_rand = sampler.draw()
            i_near = index.nearest(x_rand)
            xn = nodes[i_near]
            dist = math.dist(xn.pos, x_rand)
            if dist > eta:
                f = eta / dist
                x_new = tuple(a + f * (b - a) for a, b in zip(xn.pos, x_rand))
            else:
                x_new = x_rand
            if dist == 0.0 or not ctx.free(xn.pos, x_new):
                continue
            if sampler.clearance is not None and not sampler.accept(x_new):
                continue
            n = len(nodes) + 1
            radius = min(connection_radius(gamma, n, d), eta)
            near = index.near(x_new, radius)
            if i_near not in near:
                near.append(i_near)
            cands = []
            best = None
            for j in near:
                xj = nodes[j]
                if j != i_near and not ctx.free(xj.pos, x_new):
                    continue
                ev = ctx.evaluate(xj, x_new)
                c = ctx.new_cost(xj, ev)
                cands.append((j, ev))
                if best is None or c < best[2]:
                    best = (j, ev, c)
            parent = nodes[best[0]]
            node = PathNode(x_new, -1, root.sw, best[2], math.inf, len(nodes))
            ctx.attach(parent, node, best[1])
            parent.children.append(node)
            nodes.append(node)
            index.add(x_new)
            n_valid += 1
            for j, ev in cands:
                if j == best[0]:
                    continue
                xj = nodes[j]
                rev = ev.reversed(xj.cell)
                if ctx.new_cost(node, rev) < xj.cost:
                    ctx.subtree_update(node, xj, rev)
            if math.dist(x_new, xg) <= goal_r and ctx.free(x_new, xg):
                ev = ctx.evaluate(node, xg)
                c = ctx.new_cost(node, ev)
                if goal is None:
                    goal = PathNode(xg, -1, root.sw, c, math.inf, -1)
                    ctx.attach(node, goal, ev)
                    node.children.append(goal)
                elif c < goal.cost:
                    ctx.subtree_update(node, goal, ev)
            if goal is not None:
                key = (goal.cost.primary, goal.cost.len)
                if key != last:
                    trace.append((n_valid, goal.cost))
                    last = key
    except NoPathFound:
        status = "starved"
    elapsed = time.perf_counter() - t0
    return _result(ctx, cfg, goal, n_valid, elapsed, trace, radius, status)


# ---------------------------------------------------------------------------
# PRM*
# ---------------------------------------------------------------------------


class Roadmap:
    """Collision-checked PRM* roadmap; reusable across cost families."""

    def __init__(self, scenario: Scenario, samples: int, seed: int, z_range=None, clearance=None):
        self.scenario = scenario
        d = scenario.dims
        rng = np.random.default_rng(seed)
        sampler = Sampler(scenario, rng, z_range, clearance)
        pts = [sampler.draw() for _ in range(samples)]
        self.points = pts
        self.radius = connection_radius(gamma_constant(scenario), len(pts), d)
        self.tree = cKDTree(np.asarray(pts))
        self.adj: list[list[int]] = [[] for _ in pts]
        pairs = self.tree.query_pairs(self.radius, output_type="ndarray")
        if len(pairs):
            pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
        ps = scenario.polyset
        for u, v in pairs.tolist():
            a, b = pts[u], pts[v]
            ok = ps.segment_free3(*a, *b) if d == 3 else ps.segment_free(a[0], a[1], b[0], b[1])
            if ok:
                self.adj[u].append(v)
                self.adj[v].append(u)
        for row in self.adj:
            row.sort()

    @property
    def n(self) -> int:
        return len(self.points)

    def edge_count(self) -> int:
        return sum(len(r) for r in self.adj) // 2

    def attach(self, x: Sequence[float]) -> list[int]:
        """Roadmap nodes visible from ``x`` within the radius, else the nearest visible one."""
        ps = self.scenario.polyset
        d = self.scenario.dims

        def visible(j: int) -> bool:
            b = self.points[j]
            return ps.segment_free3(*x, *b) if d == 3 else ps.segment_free(x[0], x[1], b[0], b[1])

        near = sorted(self.tree.query_ball_point(x, self.radius))
        out = [j for j in near if visible(j)]
        if out:
            return out
        _, order = self.tree.query(x, k=self.n)
        for j in np.atleast_1d(order).tolist():
            if visible(j):
                return [j]
        return []


def prm_star(scenario: Scenario, passages: Sequence[Passage], cells: CellComplex | None,
             cfg: PlanConfig, roadmap: Roadmap | None = None) -> PlanResult:
    ctx = Context(scenario, passages, cells, cfg.cost, cfg.walk)
    _check_endpoints(ctx, cfg)
    if roadmap is None:
        roadmap = Roadmap(scenario, cfg.samples, cfg.seed, cfg.z_range, cfg.clearance_constraint)
    t0 = time.perf_counter()
    n = roadmap.n
    start, goal = n, n + 1
    pos = list(roadmap.points) + [tuple(float(v) for v in cfg.x0), tuple(float(v) for v in cfg.xg)]
    extra: dict[int, list[int]] = {start: roadmap.attach(pos[start]), goal: roadmap.attach(pos[goal])}
    goal_links = set(extra[goal])
    if ctx.free(pos[start], pos[goal]):
        extra[start].append(goal)
        goal_links.add(start)
    root = ctx.root(pos[start], start)
    label: dict[int, PathNode] = {start: root}
    settled: set[int] = set()
    heap = [(root.cost.primary, root.cost.len, 0, start)]
    seq = 1
    while heap:
        _, _, _, u = heapq.heappop(heap)
        if u in settled:
            continue
        settled.add(u)
        if u == goal:
            break
        nu = label[u]
        nbrs = extra[u] if u >= n else roadmap.adj[u]
        if u < n and u in goal_links:
            nbrs = nbrs + [goal]
        for v in nbrs:
            if v in settled:
                continue
            ev = ctx.evaluate(nu, pos[v])
            c = ctx.new_cost(nu, ev)
            old = label.get(v)
            if old is None or c < old.cost:
                node = PathNode(pos[v], -1, root.sw, c, math.inf, v)
                ctx.attach(nu, node, ev)
                label[v] = node
                heapq.heappush(heap, (c.primary, c.len, seq, v))
                seq += 1
    elapsed = time.perf_counter() - t0
    end = label.get(goal)
    trace = [(n, end.cost)] if end is not None else []
    status = None if end is not None else "no_path"
    return _result(ctx, cfg, end, n, elapsed, trace, roadmap.radius, status)


def plan(scenario: Scenario, passages: Sequence[Passage], cells: CellComplex | None, cfg: PlanConfig,
         roadmap: Roadmap | None = None) -> PlanResult:
    if cfg.planner == "prm":
        return prm_star(scenario, passages, cells, cfg, roadmap)
    return rrt_star(scenario, passages, cells, cfg)


def run_baseline(kind: str, scenario: Scenario, passages: Sequence[Passage], cells: CellComplex | None,
                 cfg: PlanConfig, roadmap: Roadmap | None = None,
                 clearance: float = DEFAULT_CLEARANCE) -> PlanResult:
    if kind == "shortest":
        cfg = replace(cfg, cost=CostSpec("shortest", q=cfg.cost.q))
    elif kind == "clearance":
        cfg = replace(cfg, cost=CostSpec("shortest", q=cfg.cost.q), clearance_constraint=clearance)
        roadmap = None
    elif kind == "maxclr":
        cfg = replace(cfg, cost=CostSpec("maxclr", q=cfg.cost.q))
    else:
        raise ValueError(f"unknown baseline {kind!r}")
    return plan(scenario, passages, cells, cfg, roadmap)


def require_path(result: PlanResult) -> PlanResult:
    """Raise when a plan found no path (planners themselves only report it)."""
    if result.status != "ok":
        raise NoPathFound(f"planning ended with status {result.status}")
    return result
