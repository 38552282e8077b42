"""Deterministic SVG rendering of scenarios, passages, cells and paths.

Coordinates are printed with fixed precision and elements are emitted in id
order, so identical inputs give byte-identical files.  The y axis is flipped
so that the map origin sits at the bottom left.
"""

from __future__ import annotations

from typing import Sequence

from .cells import CellComplex
from .env import Scenario
from .geom import ring_centroid
from .passages import Passage

MARGIN = 10.0


def _f(v: float) -> str:
    return f"{v:.3f}"


def _pts(points: Sequence[Sequence[float]]) -> str:
    return " ".join(f"{_f(p[0])},{_f(p[1])}" for p in points)


def render(scenario: Scenario, passages: Sequence[Passage] = (), cells: CellComplex | None = None,
           paths: Sequence[Sequence[Sequence[float]]] = (), regions: bool = True,
           endpoints: Sequence[Sequence[float]] = ()) -> str:
    w, h = scenario.width, scenario.height
    vb = f"{_f(-MARGIN)} {_f(-MARGIN)} {_f(w + 2 * MARGIN)} {_f(h + 2 * MARGIN)}"
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{vb}" width="{_f(w + 2 * MARGIN)}" '
        f'height="{_f(h + 2 * MARGIN)}">',
        f'<g transform="translate(0,{_f(h)}) scale(1,-1)">',
        f'<rect x="0" y="0" width="{_f(w)}" height="{_f(h)}" fill="white" stroke="black" stroke-width="1"/>',
    ]
    for o in scenario.obstacles:
        shade = "#bbbbbb" if o.is_wall else "#888888"
        out.append(f'<polygon id="o{o.id}" points="{_pts(o.footprint.vertices)}" fill="{shade}" stroke="none"/>')
    if regions:
        for p in passages:
            if p.fi is None:
                continue
            out.append(f'<polygon id="r{p.pid}" points="{_pts(p.region.polygon)}" fill="none" stroke="#3366cc" '
                       f'stroke-width="0.6" stroke-dasharray="3,2"/>')
    for p in passages:
        colour = "#cc2222" if not p.midair else "#cc22cc"
        out.append(f'<line id="p{p.pid}" x1="{_f(p.a[0])}" y1="{_f(p.a[1])}" x2="{_f(p.b[0])}" y2="{_f(p.b[1])}" '
                   f'stroke="{colour}" stroke-width="1" stroke-dasharray="4,2"/>')
    for k, path in enumerate(paths):
        if len(path) >= 2:
            out.append(f'<polyline id="path{k}" points="{_pts(path)}" fill="none" stroke="#118833" '
                       f'stroke-width="2"/>')
    for k, x in enumerate(endpoints):
        out.append(f'<circle id="x{k}" cx="{_f(x[0])}" cy="{_f(x[1])}" r="5" fill="#118833"/>')
    out.append("</g>")
    if cells is not None:
        for c in cells.cells:
            if c.is_obstacle_cell:
                continue
            cx, cy = ring_centroid(c.rings[0])
            out.append(f'<text x="{_f(cx)}" y="{_f(h - cy)}" font-size="10" text-anchor="middle" '
                       f'fill="#444444">{c.id}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
