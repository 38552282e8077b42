"""Brute-force oracles for the fast paths.

Each target returns ``(ok, report)`` where the report holds a one-line
``summary`` and, on failure, the first ``counterexample`` as plain JSON
data so the case can be replayed.
"""

from __future__ import annotations

import itertools
import json
import math
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from .cells import CellComplex, detect_cells
from .costs import CostSpec, SortedWidths, path_cost, valid_ratio, validate_weights
from .env import GenSpec, Scenario, generate, load, to_dict
from .geom import winding_number
from .passages import brute_force_detect, detect_2d, passage_set

Report = dict[str, Any]
TARGETS = ("passages", "cells", "walk", "costs")
BAR = 1000.0


def _report(ok: bool, summary: str, counterexample: Any = None) -> tuple[bool, Report]:
    return ok, {"summary": summary, "counterexample": counterexample}


def _scenarios(opts: dict, walls: bool) -> list[Scenario]:
    if opts.get("scenario"):
        return [load(opts["scenario"])]
    m = int(opts.get("m") or 40)
    seeds = int(opts.get("seeds") or 1)
    first = int(opts.get("seed") or 0)
    side = (float(opts.get("side_min") or 20.0), float(opts.get("side_max") or 60.0))
    return [generate(GenSpec(m=m, seed=first + k, side_range=side, walls=walls)) for k in range(seeds)]


# ---------------------------------------------------------------------------
# Passages
# ---------------------------------------------------------------------------


def compare_passages(s: Scenario, k_gd: int = 2) -> dict | None:
    """Difference between Delaunay-bounded and brute-force detection, or None."""
    fast = {p.key: p.width for p in detect_2d(s, k_gd)}
    slow = {p.key: p.width for p in brute_force_detect(s)}
    missing = sorted(set(slow) - set(fast))
    extra = sorted(set(fast) - set(slow))
    widths = [k for k in set(fast) & set(slow) if abs(fast[k] - slow[k]) > 1e-9]
    if not (missing or extra or widths):
        return None
    return {"seed": s.seed, "m": len(s.regular), "missing": missing, "extra": extra, "width_mismatch": sorted(widths)}


def check_passages(opts: dict) -> tuple[bool, Report]:
    # The equivalence is stated for open maps, so generated scenarios carry no walls.
    scenarios = _scenarios(opts, walls=False)
    k_gd = int(opts.get("kgd") or 2)
    bad = 0
    first = None
    for s in scenarios:
        diff = compare_passages(s, k_gd)
        if diff is not None:
            bad += 1
            if first is None:
                first = dict(diff, scenario=to_dict(s))
    return _report(bad == 0, f"{len(scenarios) - bad}/{len(scenarios)} scenarios match brute force", first)


# ---------------------------------------------------------------------------
# Cells
# ---------------------------------------------------------------------------


def _inside(cell, x: Sequence[float]) -> bool:
    if winding_number(x, cell.rings[0]) == 0:
        return False
    return all(winding_number(x, r) == 0 for r in cell.rings[1:])


def cell_invariants(cx: CellComplex, points: int = 2000, seed: int = 0) -> dict | None:
    """Area balance, shared passage sides and point location against winding numbers."""
    s = cx.scenario
    free = [c for c in cx.cells if not c.is_obstacle_cell]
    area = sum(c.area for c in free) + sum(o.footprint.area for o in s.regular)
    if abs(area - s.width * s.height) > 1e-6 * s.width * s.height:
        return {"kind": "area", "cells_plus_obstacles": area, "map": s.width * s.height}
    for c in free:
        for pid, nb in c.passage_sides:
            if nb < 0 or nb == c.id or (pid, c.id) not in cx.cells[nb].passage_sides:
                return {"kind": "adjacency", "cell": c.id, "pid": pid, "neighbor": nb}
    for p in cx.passages:
        if p.midair:
            continue
        owners = [c.id for c in free if any(pid == p.pid for pid, _ in c.passage_sides)]
        if len(owners) != 2:
            return {"kind": "passage_sides", "pid": p.pid, "cells": owners}
    rng = np.random.default_rng(seed)
    n = 0
    while n < points:
        x = tuple(rng.uniform((0.0, 0.0), (s.width, s.height)).tolist())
        if not s.is_free(x):
            continue
        n += 1
        c = cx.locate(x)
        if not _inside(cx.cells[c], x):
            return {"kind": "locate", "point": list(x), "cell": c}
        others = [d.id for d in free if d.id != c and _inside(d, x)]
        if others:
            return {"kind": "overlap", "point": list(x), "cells": [c] + others}
    return None


def compare_cell_json(expected: list[dict], actual: list[dict]) -> dict | None:
    if len(expected) != len(actual):
        return {"kind": "count", "file": len(expected), "recomputed": len(actual)}
    for e, a in zip(expected, actual):
        if json.dumps(e, sort_keys=True) != json.dumps(a, sort_keys=True):
            return {"kind": "cell", "id": a.get("id"), "file": e, "recomputed": a}
    return None


def check_cells(opts: dict) -> tuple[bool, Report]:
    scenarios = _scenarios(opts, walls=bool(opts.get("walls", True)))
    cells_file = opts.get("cells_file")
    for s in scenarios:
        ps = detect_2d(s, int(opts.get("kgd") or 2))
        cx = detect_cells(ps, s)
        if cells_file:
            doc = json.loads(Path(cells_file).read_text())
            expected = doc["cells"] if isinstance(doc, dict) else doc
            # Round-trip through JSON so floats compare in their serialized form.
            diff = compare_cell_json(expected, json.loads(json.dumps(cx.to_json())))
            if diff is not None:
                return _report(False, f"cell file disagrees with recomputation ({diff['kind']})",
                               dict(diff, seed=s.seed))
        diff = cell_invariants(cx, seed=s.seed)
        if diff is not None:
            return _report(False, f"cell invariant broken ({diff['kind']})", dict(diff, seed=s.seed))
    return _report(True, f"{len(scenarios)} scenario(s) consistent")


# ---------------------------------------------------------------------------
# Walk
# ---------------------------------------------------------------------------


def random_edges(s: Scenario, n: int, seed: int, spread: float = 80.0) -> list[tuple[tuple[float, float], ...]]:
    """Collision-free random edges with free endpoints."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        a = tuple(rng.uniform((0.0, 0.0), (s.width, s.height)).tolist())
        b = tuple((np.asarray(a) + rng.normal(0.0, spread, 2)).tolist())
        if s.in_bounds(b) and s.is_free(a) and s.is_free(b) and s.segment_free(a, b):
            out.append((a, b))
    return out


def walk_mismatches(cx: CellComplex, edges, limit: int = 1) -> tuple[int, list[dict]]:
    """Compare the cell walk with a global traversal check over every passage."""
    s = cx.scenario
    pset = passage_set(cx.passages, s.eps)
    bad = 0
    examples: list[dict] = []
    for a, b in edges:
        end, crossed = cx.walk(cx.locate(a), a, b)
        expect = pset.crossings(a[0], a[1], b[0], b[1])
        target = cx.locate(b)
        if sorted(crossed) != sorted(expect) or end != target:
            bad += 1
            if len(examples) < limit:
                examples.append({"a": list(a), "b": list(b), "walk": [end, list(crossed)],
                                 "oracle": [target, list(expect)], "seed": s.seed})
    return bad, examples


def check_walk(opts: dict) -> tuple[bool, Report]:
    scenarios = _scenarios(opts, walls=bool(opts.get("walls", True)))
    edges = int(opts.get("edges") or 10_000)
    per = max(1, edges // len(scenarios))
    bad = 0
    total = 0
    first = None
    for s in scenarios:
        cx = detect_cells(detect_2d(s, int(opts.get("kgd") or 2)), s)
        n, ex = walk_mismatches(cx, random_edges(s, per, s.seed))
        bad += n
        total += per
        if ex and first is None:
            first = ex[0]
    return _report(bad == 0, f"{bad} mismatches on {total} edges", first)


# ---------------------------------------------------------------------------
# Costs
# ---------------------------------------------------------------------------


def _vectors(values: Sequence[float], q: int) -> list[SortedWidths]:
    return [SortedWidths(tuple(v)) for v in itertools.combinations_with_replacement(sorted(values), q)]


def _key(c) -> tuple[float, float]:
    return (c.primary, c.len)


def _check_family(spec: CostSpec, widths: Sequence[float], bar: float) -> dict | None:
    """Monotonicity, boundedness, order preservation and the lexicographic
    equivalence over every sorted vector of ``widths`` padded with ``bar``."""
    q = spec.dim
    vecs = _vectors(list(widths) + [bar], q)
    suffixes = [()] + [s for k in range(1, q + 1) for s in itertools.combinations_with_replacement(widths, k)]
    lens = (0.0, 1.0)
    states = [(v, ln) for v in vecs for ln in lens]
    keys = [_key(path_cost(spec, v, ln)) for v, ln in states]
    floor = -math.fsum(spec.weights) * bar if spec.kind == "gpw" else -bar
    for (v, ln), k in zip(states, keys):
        if not (math.isfinite(k[0]) and k[0] >= floor):
            return {"property": "boundedness", "vector": list(v.entries), "cost": k[0]}
    # Order preservation concerns the primary cost; length only breaks ties.
    order = sorted(range(len(states)), key=keys.__getitem__)
    for suf in suffixes:
        mapped = []
        for idx in order:
            v, ln = states[idx]
            mapped.append(_key(path_cost(spec, v.extend(suf), ln + 1.0)))
        for idx, after in zip(order, mapped):
            if after < keys[idx]:
                return {"property": "monotonicity", "vector": list(states[idx][0].entries), "suffix": list(suf)}
        for t in range(1, len(order)):
            tied = keys[order[t]][0] == keys[order[t - 1]][0]
            if mapped[t][0] < mapped[t - 1][0] or (tied and mapped[t][0] != mapped[t - 1][0]):
                return {"property": "order_preservation", "first": list(states[order[t - 1]][0].entries),
                        "second": list(states[order[t]][0].entries), "suffix": list(suf)}
    if spec.kind == "gpw":
        # A lexicographically larger width vector must cost strictly less.
        lex = sorted(vecs, key=lambda v: v.entries)
        prim = [path_cost(spec, v, 0.0).primary for v in lex]
        for t in range(1, len(lex)):
            if not prim[t] < prim[t - 1]:
                return {"property": "lexicographic", "smaller": list(lex[t - 1].entries),
                        "larger": list(lex[t].entries), "costs": [prim[t - 1], prim[t]]}
    return None


def exhaustive_costs(universe: Sequence[int] = (1, 2, 3, 5, 8, 13, 21), max_size: int = 6,
                     max_q: int = 3, bar: float = BAR) -> tuple[int, dict | None]:
    """Every width subset of ``universe`` up to ``max_size`` and every q up to ``max_q``."""
    cases = 0
    for size in range(1, max_size + 1):
        for ws in itertools.combinations(universe, size):
            widths = [float(w) for w in ws]
            specs = [CostSpec("mpw")]
            for q in range(1, max_q + 1):
                ratio = valid_ratio(q, widths + [bar])
                if validate_weights(q, 100.0, widths + [bar]):
                    ratio = 100.0
                specs.append(CostSpec("gpw", q=q, ratio=ratio))
            for spec in specs:
                cases += 1
                bad = _check_family(spec, widths, bar)
                if bad is not None:
                    return cases, dict(bad, widths=widths, kind=spec.kind, q=spec.q, ratio=spec.ratio)
    return cases, None


def random_costs(trials: int, seed: int = 0, bar: float = BAR) -> tuple[int, dict | None]:
    """Randomized pairs of prefixes with a shared suffix on integer width sets."""
    rng = np.random.default_rng(seed)
    done = 0
    per_set = 100
    while done < trials:
        size = int(rng.integers(1, 7))
        widths = sorted(set(rng.integers(1, 200, size=size).tolist()))
        widths = [float(w) for w in widths]
        q = int(rng.integers(1, 4))
        kind = "mpw" if rng.random() < 0.25 else "gpw"
        spec = CostSpec(kind, q=q, ratio=valid_ratio(q, widths + [bar]))
        pool = np.array(widths + [bar])
        n = min(per_set, trials - done)
        k1, k2, k3 = rng.integers(0, 4, size=(3, n))
        l1, l2, l3 = rng.integers(0, 50, size=(3, n)).astype(float)
        for t in range(n):
            p1 = SortedWidths.initial(spec.dim, bar).extend(rng.choice(pool, k1[t]).tolist())
            p2 = SortedWidths.initial(spec.dim, bar).extend(rng.choice(pool, k2[t]).tolist())
            suf = rng.choice(pool, k3[t]).tolist()
            c1 = path_cost(spec, p1, l1[t])
            c2 = path_cost(spec, p2, l2[t])
            d1 = path_cost(spec, p1.extend(suf), l1[t] + l3[t])
            d2 = path_cost(spec, p2.extend(suf), l2[t] + l3[t])
            case = {"widths": widths, "kind": kind, "q": q, "ratio": spec.ratio, "first": list(p1.entries),
                    "second": list(p2.entries), "suffix": suf}
            if d1 < c1 or d2 < c2:
                return done + t + 1, dict(case, property="monotonicity")
            a1, a2, b1, b2 = c1.primary, c2.primary, d1.primary, d2.primary
            if (a1 <= a2 and b1 > b2) or (a2 <= a1 and b2 > b1):
                return done + t + 1, dict(case, property="order_preservation")
            if spec.kind == "gpw" and p1.entries > p2.entries and not c1.primary < c2.primary:
                return done + t + 1, dict(case, property="lexicographic")
        done += n
    return done, None


def tradeoff_violation() -> dict | None:
    """Order-preservation violation of ``len - w * f_p`` on the two-barrier scene."""
    from .costs import tradeoff_cost
    from .geom import polyline_length
    from .passages import detect_2d as detect
    from .planners import replay_path
    from .scenarios import tradeoff_scenario

    s, d = tradeoff_scenario()
    ps = detect(s)
    cx = detect_cells(ps, s)
    w = d["weight"]

    def score(path):
        _, _, fp = replay_path(path, ps, cx, s, 1)
        return tradeoff_cost(polyline_length(path), fp, w), fp

    a, fa = score(d["via_a"])
    b, fb = score(d["via_b"])
    full_a, _ = score(d["via_a"] + d["tail"][1:])
    full_b, _ = score(d["via_b"] + d["tail"][1:])
    if a < b and full_a > full_b:
        return {"prefix_a": a, "prefix_b": b, "full_a": full_a, "full_b": full_b, "f_p": [fa, fb], "weight": w}
    return None


def check_costs(opts: dict) -> tuple[bool, Report]:
    cases, bad = exhaustive_costs()
    if bad is not None:
        return _report(False, f"exhaustive enumeration failed after {cases} cases", bad)
    trials = int(opts.get("trials") or 100_000)
    done, bad = random_costs(trials, int(opts.get("seed") or 0))
    if bad is not None:
        return _report(False, f"randomized trial {done} failed", bad)
    neg = tradeoff_violation()
    if neg is None:
        return _report(False, "trade-off cost did not violate order preservation", {"scenario": "tradeoff"})
    return _report(True, f"{cases} exhaustive families and {done} random trials hold; trade-off cost violates "
                         f"order preservation as expected")


CHECKS: dict[str, Callable[[dict], tuple[bool, Report]]] = {
    "passages": check_passages,
    "cells": check_cells,
    "walk": check_walk,
    "costs": check_costs,
}


def run(target: str, opts: dict) -> tuple[bool, Report]:
    if target not in CHECKS:
        raise ValueError(f"unknown oracle target {target!r}")
    return CHECKS[target](opts)
