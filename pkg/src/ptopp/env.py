"""Scenario model, random generation and JSON serialisation.

A scenario holds convex obstacles (2D) or vertical prisms (3D) inside a
rectangular map.  Boundary walls are optional thin slabs appended after the
regular obstacles; they are never written to disk, only the flag is.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import GeometryError, InvariantViolation, ParseError, PlacementFailure
from .geom import ConvexPolygon, Point2, eps_for_extent, max_separation, rectangle, square

FORMAT_VERSION = 1
DEFAULT_EXTENT_2D = (1000.0, 600.0)
DEFAULT_EXTENT_3D = (1000.0, 600.0, 400.0)
WALL_THICKNESS = 1.0
MAX_REJECTIONS = 100_000


@dataclass(frozen=True)
class Obstacle:
    id: int
    footprint: ConvexPolygon
    height: float = math.inf
    is_wall: bool = False

    @cached_property
    def centroid(self) -> Point2:
        return self.footprint.centroid


@dataclass(frozen=True)
class Scenario:
    dims: int
    extent: tuple[float, ...]
    obstacles: tuple[Obstacle, ...]
    walls: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "extent", tuple(float(v) for v in self.extent))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))

    @property
    def width(self) -> float:
        return self.extent[0]

    @property
    def height(self) -> float:
        return self.extent[1]

    @cached_property
    def eps(self) -> float:
        return eps_for_extent(self.extent)

    @cached_property
    def diagonal(self) -> float:
        return math.hypot(self.extent[0], self.extent[1])

    @property
    def regular(self) -> tuple[Obstacle, ...]:
        return tuple(o for o in self.obstacles if not o.is_wall)

    @property
    def m(self) -> int:
        return len(self.obstacles)

    @cached_property
    def free_area(self) -> float:
        """Map area minus regular obstacle area (the 2D free-space measure)."""
        return self.extent[0] * self.extent[1] - sum(o.footprint.area for o in self.regular)

    @cached_property
    def free_volume(self) -> float:
        if self.dims == 2:
            return self.free_area
        vol = self.extent[0] * self.extent[1] * self.extent[2]
        return vol - sum(o.footprint.area * min(o.height, self.extent[2]) for o in self.regular)

    @cached_property
    def polyset(self):
        """Kernel view of every obstacle (walls included)."""
        verts = []
        offsets = [0]
        for o in self.obstacles:
            verts.extend(o.footprint.vertices)
            offsets.append(len(verts))
        heights = [o.height for o in self.obstacles]
        return _kernels.PolySet(np.array(verts, dtype=float).reshape(-1, 2), offsets, heights, self.eps)

    def in_bounds(self, x: Sequence[float]) -> bool:
        return all(0.0 <= x[k] <= self.extent[k] for k in range(self.dims))

    def is_free(self, x: Sequence[float]) -> bool:
        if not self.in_bounds(x):
            return False
        if self.dims == 3:
            return self.polyset.point_free3(x[0], x[1], x[2])
        return self.polyset.point_free(x[0], x[1])

    def segment_free(self, a: Sequence[float], b: Sequence[float]) -> bool:
        if self.dims == 3:
            return self.polyset.segment_free3(a[0], a[1], a[2], b[0], b[1], b[2])
        return self.polyset.segment_free(a[0], a[1], b[0], b[1])

    def clearance(self, x: Sequence[float]) -> float:
        """Distance to the nearest obstacle (walls count when present)."""
        if self.dims == 3:
            return self.polyset.clearance3(x[0], x[1], x[2])
        return self.polyset.clearance(x[0], x[1])


@dataclass(frozen=True)
class GenSpec:
    m: int
    side_range: tuple[float, float] = (20.0, 60.0)
    placement: str = "uniform"
    dims: int = 2
    height_range: tuple[float, float] = (0.0, 400.0)
    seed: int = 0
    extent: tuple[float, ...] | None = None
    walls: bool = True
    rotate: bool = True
    extra: dict = field(default_factory=dict, compare=False)


def wall_slabs(extent: Sequence[float], first_id: int, dims: int) -> list[Obstacle]:
    w, h = extent[0], extent[1]
    t = WALL_THICKNESS
    height = extent[2] if dims == 3 else math.inf
    rects = [
        rectangle(-t, -t, 0.0, h + t),
        rectangle(w, -t, w + t, h + t),
        rectangle(0.0, -t, w, 0.0),
        rectangle(0.0, h, w, h + t),
    ]
    return [Obstacle(first_id + k, r, height, True) for k, r in enumerate(rects)]


def walls_to_obstacles(s: Scenario) -> Scenario:
    """Scenario with the four boundary slabs appended (idempotent)."""
    if any(o.is_wall for o in s.obstacles):
        return s
    regular = s.regular
    slabs = wall_slabs(s.extent, len(regular), s.dims)
    return Scenario(s.dims, s.extent, regular + tuple(slabs), True, s.seed)


def without_walls(s: Scenario) -> Scenario:
    return Scenario(s.dims, s.extent, s.regular, False, s.seed)


BATCH = 256
GRID_STEP = 4.0
_MARGIN = 1e-6


def _approx_separation(cx, cy, a, ang, px, py, pa, pang):
    """Max SAT separation of one square against many squares (analytic form)."""
    dx = cx - px
    dy = cy - py
    delta = ang - pang
    g = np.abs(np.cos(delta)) + np.abs(np.sin(delta))
    c, s = math.cos(ang), math.sin(ang)
    pc, ps = np.cos(pang), np.sin(pang)
    sep = np.abs(c * dx + s * dy) - a - pa * g
    sep = np.maximum(sep, np.abs(-s * dx + c * dy) - a - pa * g)
    sep = np.maximum(sep, np.abs(pc * dx + ps * dy) - pa - a * g)
    return np.maximum(sep, np.abs(-ps * dx + pc * dy) - pa - a * g)


def _square_distance(px, py, cx, cy, a, ang):
    c, s = math.cos(ang), math.sin(ang)
    u = np.abs((px - cx) * c + (py - cy) * s) - a
    v = np.abs(-(px - cx) * s + (py - cy) * c) - a
    return np.hypot(np.maximum(u, 0.0), np.maximum(v, 0.0))


class _Placer:
    """Rejection sampler for non-touching squares.

    A grid of cell centers carries the clearance to the map border and to the
    squares placed so far.  A square of half side ``a`` contains the disc of
    radius ``a`` around its center, so a feasible center can only lie in a cell
    whose center clearance is at least ``a`` minus the cell half-diagonal.
    Uniform proposals are drawn from those cells, which is uniform on a
    superset of the feasible set; conditioning on the exact test then gives
    the same distribution as proposing over the whole map, only faster.
    Gaussian proposals keep their density and merely reject early on the grid.
    """

    def __init__(self, w: float, h: float, m: int, eps: float, placement: str, rng):
        self.w, self.h, self.eps, self.placement, self.rng = w, h, eps, placement, rng
        self.nx = max(1, math.ceil(w / GRID_STEP))
        self.ny = max(1, math.ceil(h / GRID_STEP))
        self.gx = w / self.nx
        self.gy = h / self.ny
        self.half_diag = 0.5 * math.hypot(self.gx, self.gy)
        xs = (np.arange(self.nx) + 0.5) * self.gx
        ys = (np.arange(self.ny) + 0.5) * self.gy
        self.px, self.py = (g.ravel() for g in np.meshgrid(xs, ys))
        self.field = np.minimum(np.minimum(self.px, w - self.px), np.minimum(self.py, h - self.py))
        self.placed: list[ConvexPolygon] = []
        self.cx = np.zeros(m)
        self.cy = np.zeros(m)
        self.a = np.zeros(m)
        self.ang = np.zeros(m)

    def _fits(self, cx: float, cy: float, side: float, a: float, ang: float, reach: float):
        w, h, eps, n = self.w, self.h, self.eps, len(self.placed)
        if not reach + _MARGIN < min(cx, cy, w - cx, h - cy):
            return None
        cand = None
        if n:
            sep = _approx_separation(cx, cy, a, ang, self.cx[:n], self.cy[:n], self.a[:n], self.ang[:n])
            if sep.min() < eps - _MARGIN:
                return None
            cand = square((cx, cy), side, ang)
            for k in np.nonzero(sep <= eps + _MARGIN)[0]:
                if max_separation(cand.vertices, self.placed[k].vertices) <= eps:
                    return None
        if cand is None:
            cand = square((cx, cy), side, ang)
        x0, y0, x1, y1 = cand.bbox
        if x0 > eps and y0 > eps and x1 < w - eps and y1 < h - eps:
            return cand
        return None

    def place(self, side: float, ang: float, m: int) -> ConvexPolygon:
        a = 0.5 * side
        reach = a * (abs(math.cos(ang)) + abs(math.sin(ang)))
        ok_cells = self.field >= a - self.half_diag
        cells = np.nonzero(ok_cells)[0]
        n = len(self.placed)
        if len(cells) == 0:
            raise PlacementFailure(f"placed {n} of {m} obstacles; no room left for side {side:.3f}")
        rng = self.rng
        rejections = 0
        while True:
            if self.placement == "uniform":
                pick = cells[rng.integers(0, len(cells), BATCH)]
                off = rng.random((BATCH, 2))
                xs = self.px[pick] + (off[:, 0] - 0.5) * self.gx
                ys = self.py[pick] + (off[:, 1] - 0.5) * self.gy
                viable = np.ones(BATCH, dtype=bool)
            else:
                xs = rng.normal(0.5 * self.w, 0.25 * self.w, BATCH)
                ys = rng.normal(0.5 * self.h, 0.25 * self.h, BATCH)
                ix = np.clip((xs / self.gx).astype(np.int64), 0, self.nx - 1)
                iy = np.clip((ys / self.gy).astype(np.int64), 0, self.ny - 1)
                inside = (xs > 0.0) & (xs < self.w) & (ys > 0.0) & (ys < self.h)
                viable = inside & ok_cells[iy * self.nx + ix]
            for b in range(BATCH):
                poly = None
                if viable[b]:
                    poly = self._fits(float(xs[b]), float(ys[b]), side, a, ang, reach)
                if poly is not None:
                    self.cx[n], self.cy[n], self.a[n], self.ang[n] = float(xs[b]), float(ys[b]), a, ang
                    self.placed.append(poly)
                    self.field = np.minimum(self.field, _square_distance(self.px, self.py, xs[b], ys[b], a, ang))
                    return poly
                rejections += 1
                if rejections >= MAX_REJECTIONS:
                    raise PlacementFailure(
                        f"placed {n} of {m} obstacles; the next one was rejected {MAX_REJECTIONS} times"
                    )


def generate(spec: GenSpec) -> Scenario:
    """Random non-overlapping squares placed by rejection sampling.

    Sides, rotations and heights are drawn up front and obstacles are placed
    largest first, which keeps dense maps feasible.  Ids follow placement
    order.  Raises PlacementFailure when one obstacle collects MAX_REJECTIONS
    rejections or provably has no room left.
    """
    if spec.m < 1:
        raise ValueError("m must be at least 1")
    lo, hi = spec.side_range
    if not (0.0 < lo <= hi):
        raise ValueError("side range must be positive")
    if spec.placement not in ("uniform", "gaussian"):
        raise ValueError(f"unknown placement {spec.placement!r}")
    dims = spec.dims
    extent = tuple(spec.extent) if spec.extent else (DEFAULT_EXTENT_3D if dims == 3 else DEFAULT_EXTENT_2D)
    eps = eps_for_extent(extent)
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    sides = rng.uniform(lo, hi, spec.m)
    angles = rng.uniform(0.0, 0.5 * math.pi, spec.m) if spec.rotate else np.zeros(spec.m)
    if dims == 3:
        heights = rng.uniform(spec.height_range[0], spec.height_range[1], spec.m)
    else:
        heights = np.full(spec.m, math.inf)
    order = np.argsort(-sides, kind="stable")
    placer = _Placer(extent[0], extent[1], spec.m, eps, spec.placement, rng)
    placed = [placer.place(float(sides[i]), float(angles[i]), spec.m) for i in order]
    obstacles = [Obstacle(k, p, float(heights[i])) for k, (p, i) in enumerate(zip(placed, order))]
    s = Scenario(dims, extent, tuple(obstacles), False, spec.seed)
    return walls_to_obstacles(s) if spec.walls else s


def validate(s: Scenario) -> None:
    """Raise InvariantViolation naming the first offending obstacle."""
    if s.dims not in (2, 3) or len(s.extent) != s.dims:
        raise InvariantViolation("dims and extent disagree")
    if any(not (math.isfinite(v) and v > 0.0) for v in s.extent):
        raise InvariantViolation("extent must be positive and finite")
    eps = s.eps
    regular = s.regular
    for k, o in enumerate(regular):
        if o.id != k:
            raise InvariantViolation("obstacle ids must be 0..m-1 in order", o.id)
        x0, y0, x1, y1 = o.footprint.bbox
        if x0 <= 0.0 or y0 <= 0.0 or x1 >= s.extent[0] or y1 >= s.extent[1]:
            raise InvariantViolation(f"obstacle {o.id} is not strictly inside the map", o.id)
        if s.dims == 3:
            if not (0.0 < o.height <= s.extent[2]):
                raise InvariantViolation(f"obstacle {o.id} height outside (0, {s.extent[2]}]", o.id)
        elif o.height != math.inf:
            raise InvariantViolation(f"2D obstacle {o.id} has a finite height", o.id)
    n = len(regular)
    if n:
        boxes = np.array([o.footprint.bbox for o in regular])
        for a in range(n):
            b = boxes[a]
            near = np.nonzero(
                (boxes[a + 1 :, 0] <= b[2] + eps)
                & (boxes[a + 1 :, 2] >= b[0] - eps)
                & (boxes[a + 1 :, 1] <= b[3] + eps)
                & (boxes[a + 1 :, 3] >= b[1] - eps)
            )[0]
            for k in near:
                o2 = regular[a + 1 + k]
                if max_separation(regular[a].footprint.vertices, o2.footprint.vertices) <= eps:
                    raise InvariantViolation(f"obstacles {regular[a].id} and {o2.id} overlap or touch", o2.id)
    walls = [o for o in s.obstacles if o.is_wall]
    if walls and (not s.walls or len(walls) != 4):
        raise InvariantViolation("wall slabs and wall flag disagree")


def to_dict(s: Scenario) -> dict:
    obstacles = []
    for o in s.regular:
        d = {"id": o.id, "vertices": [[x, y] for x, y in o.footprint.vertices]}
        if s.dims == 3:
            d["height"] = o.height
        obstacles.append(d)
    return {
        "version": FORMAT_VERSION,
        "dims": s.dims,
        "extent": list(s.extent),
        "seed": s.seed,
        "obstacles": obstacles,
        "walls": s.walls,
    }


def from_dict(data: dict) -> Scenario:
    try:
        if data.get("version") != FORMAT_VERSION:
            raise ParseError(f"unsupported scenario version {data.get('version')!r}")
        dims = int(data["dims"])
        extent = tuple(float(v) for v in data["extent"])
        seed = int(data.get("seed", 0))
        walls = bool(data.get("walls", False))
        raw = sorted(data["obstacles"], key=lambda d: int(d["id"]))
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ParseError(f"malformed scenario: {exc}") from exc
    obstacles = []
    for d in raw:
        oid = int(d["id"])
        try:
            pts = [(float(p[0]), float(p[1])) for p in d["vertices"]]
            poly = ConvexPolygon(tuple(pts))
        except GeometryError as exc:
            raise InvariantViolation(f"obstacle {oid}: {exc}", oid) from exc
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ParseError(f"obstacle {oid}: malformed vertices") from exc
        height = float(d["height"]) if dims == 3 and "height" in d else math.inf
        if dims == 3 and "height" not in d:
            raise ParseError(f"obstacle {oid}: 3D obstacles need a height")
        obstacles.append(Obstacle(oid, poly, height))
    s = Scenario(dims, extent, tuple(obstacles), False, seed)
    validate(s)
    return walls_to_obstacles(s) if walls else s


def dumps(s: Scenario) -> str:
    return json.dumps(to_dict(s), indent=1)


def save(s: Scenario, path: str | Path) -> None:
    Path(path).write_text(dumps(s) + "\n")


def load(path: str | Path) -> Scenario:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read scenario {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError("scenario file must hold a JSON object")
    return from_dict(data)
