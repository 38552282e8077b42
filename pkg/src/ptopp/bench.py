"""Benchmark suites: detection scaling, planner timing, cost evolution and
the compiled-versus-Python kernel comparison.

Each trial is self-contained and keyed by its scenario and plan seeds, so a
row can be reproduced on its own.  Rows are plain dicts written as CSV.
"""

from __future__ import annotations

import csv
import gc
import importlib
import statistics
import subprocess
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .cells import detect_cells
from .costs import CostSpec
from .env import GenSpec, Scenario, generate
from .passages import brute_force_detect, detect_2d
from .planners import PlanConfig, PlanResult, plan, run_baseline

FIELDS = [
    "suite", "m", "samples", "planner", "kind", "trial", "scenario_seed", "plan_seed", "time_ms",
    "passages", "cells", "cost", "length", "f_p", "n", "status", "version",
]
PLAN_KINDS = ("shortest", "clearance", "maxclr", "gpw", "gpw+traversal")


def version() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True, text=True,
                             cwd=Path(__file__).resolve().parent, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    try:
        from importlib.metadata import version as v

        return v("artifact")
    except Exception:
        return "unknown"


def timed(fn: Callable, *args, **kw):
    """Call with the garbage collector paused; returns (result, seconds)."""
    gc.collect()
    gc.disable()
    try:
        t = time.perf_counter()
        out = fn(*args, **kw)
        return out, time.perf_counter() - t
    finally:
        gc.enable()


def corners(s: Scenario, inset: float = 10.0) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Free start and goal near opposite map corners."""
    w, h = s.width, s.height
    z = (inset,) if s.dims == 3 else ()
    for k in range(200):
        d = inset + 2.0 * k
        x0 = (d, d) + z
        if s.is_free(x0):
            break
    for k in range(200):
        d = inset + 2.0 * k
        xg = (w - d, h - d) + z
        if s.is_free(xg):
            break
    return x0, xg


# ---------------------------------------------------------------------------
# Trials
# ---------------------------------------------------------------------------


def detect_trial(m: int, seed: int, brute: bool = True) -> dict:
    s = generate(GenSpec(m=m, seed=seed))
    ps, t = timed(detect_2d, s)
    cx = detect_cells(ps, s)
    row = dict(suite="detect", m=m, kind="delaunay", trial=seed, scenario_seed=seed, plan_seed="",
               time_ms=t * 1e3, passages=len(ps), cells=len(cx.cells))
    rows = [row]
    if brute:
        bs, tb = timed(brute_force_detect, s)
        rows.append(dict(row, kind="brute", time_ms=tb * 1e3, passages=len(bs), cells=""))
    return {"rows": rows}


def plan_setup(m: int, scenario_seed: int):
    s = generate(GenSpec(m=m, seed=scenario_seed))
    ps = detect_2d(s)
    return s, ps, detect_cells(ps, s)


def plan_kind(kind: str, s, ps, cx, cfg: PlanConfig) -> PlanResult:
    if kind in ("shortest", "clearance", "maxclr"):
        return run_baseline(kind, s, ps, cx, cfg)
    if kind.endswith("+traversal"):
        base = kind.split("+")[0]
        return plan(s, ps, cx, replace(cfg, cost=CostSpec(base), walk="traversal"))
    return plan(s, ps, cx, replace(cfg, cost=CostSpec(kind)))


def plan_trial(m: int, samples: int, scenario_seed: int, plan_seed: int, planner: str = "rrt",
               kinds: Sequence[str] = PLAN_KINDS) -> dict:
    s, ps, cx = plan_setup(m, scenario_seed)
    x0, xg = corners(s)
    cfg = PlanConfig(x0, xg, planner=planner, samples=samples, seed=plan_seed)
    rows = []
    for kind in kinds:
        r, _ = timed(plan_kind, kind, s, ps, cx, cfg)
        rows.append(dict(suite="plan", m=m, samples=samples, planner=planner, kind=kind, trial=plan_seed,
                         scenario_seed=scenario_seed, plan_seed=plan_seed, time_ms=r.time_ms,
                         passages=len(ps), cells=len(cx.cells), cost=r.cost.primary if r.cost else "",
                         length=r.length if r.cost else "", f_p=r.f_p if r.ok else "", status=r.status))
    return {"rows": rows}


def evolution_trial(m: int, samples: int, scenario_seed: int, plan_seed: int,
                    kinds: Sequence[str] = ("mpw", "maxclr")) -> dict:
    s, ps, cx = plan_setup(m, scenario_seed)
    x0, xg = corners(s)
    cfg = PlanConfig(x0, xg, samples=samples, seed=plan_seed)
    rows = []
    for kind in kinds:
        r = plan_kind(kind, s, ps, cx, cfg)
        for n, c in r.trace:
            rows.append(dict(suite="evolution", m=m, samples=samples, planner="rrt", kind=kind, trial=plan_seed,
                             scenario_seed=scenario_seed, plan_seed=plan_seed, cost=c.primary, length=c.len,
                             n=n, status=r.status))
    return {"rows": rows}


def kernel_trial(m: int, seed: int, edges: int = 20000) -> dict:
    """Time the hot kernels in both backends on the same inputs."""
    s = generate(GenSpec(m=m, seed=seed))
    ps = detect_2d(s)
    cx = detect_cells(ps, s)
    rng = np.random.default_rng(seed)
    pts = rng.uniform((0.0, 0.0), (s.width, s.height), size=(edges, 2))
    ends = pts + rng.normal(0.0, 30.0, size=(edges, 2))
    rows = []
    for name in ("_ckernels", "_pykernels"):
        try:
            mod = importlib.import_module(f"ptopp.{name}")
        except ImportError:
            continue
        polys = [o.footprint for o in s.obstacles]
        verts = np.array([v for p in polys for v in p.vertices], dtype=np.float64)
        offs = [0] + np.cumsum([len(p.vertices) for p in polys]).tolist()
        heights = [o.height for o in s.obstacles]
        pset = mod.PolySet(verts, offs, heights, s.eps)
        n = len(s.obstacles)
        ii, jj = np.triu_indices(n, 1)
        empty = np.zeros(1, dtype=np.int64)
        _, t_pairs = timed(pset.check_pairs, ii.astype(np.int64), jj.astype(np.int64), empty, empty, 1)
        seg = [(a[0], a[1], b[0], b[1]) for a, b in zip(pts.tolist(), ends.tolist())]

        def collide():
            for e in seg:
                pset.segment_free(*e)

        _, t_coll = timed(collide)
        cw = cx.walker_for(mod)
        free = [e for e in seg if s.segment_free(e[:2], e[2:]) and s.is_free(e[:2])]
        starts = [cx.locate(e[:2]) for e in free]

        def walk():
            for c, e in zip(starts, free):
                cw.walk(c, *e)

        _, t_walk = timed(walk)
        backend = mod.BACKEND
        for kind, t, count in (("brute_pairs", t_pairs, len(ii)), ("segment_free", t_coll, len(seg)),
                               ("cell_walk", t_walk, len(free))):
            rows.append(dict(suite="kernels", m=m, planner=backend, kind=kind, trial=seed, scenario_seed=seed,
                             plan_seed="", time_ms=t * 1e3, n=count))
    return {"rows": rows}


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


def _run(tasks: list[tuple[Callable, tuple]], jobs: int) -> list[dict]:
    rows: list[dict] = []
    if jobs <= 1:
        results = [fn(*args) for fn, args in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(fn, *args) for fn, args in tasks]
            results = []
            for f in futures:
                try:
                    results.append(f.result())
                except Exception as exc:  # partial failure: flag the row, keep going
                    results.append({"rows": [dict(suite="error", status=f"failed: {exc}")]})
    ver = version()
    for r in results:
        for row in r["rows"]:
            row.setdefault("version", ver)
            rows.append(row)
    return rows


def run_suite(suite: str, ms: Sequence[int] = (40,), trials: int = 5, samples: int = 2000,
              planner: str = "rrt", jobs: int = 1, scenario_seed: int = 0, brute: bool = True) -> list[dict]:
    if suite == "detect":
        tasks = [(detect_trial, (m, seed, brute)) for m in ms for seed in range(trials)]
    elif suite == "plan":
        tasks = [(plan_trial, (m, samples, scenario_seed, seed, planner)) for m in ms for seed in range(trials)]
    elif suite == "evolution":
        tasks = [(evolution_trial, (m, samples, scenario_seed, seed)) for m in ms for seed in range(trials)]
    elif suite == "kernels":
        tasks = [(kernel_trial, (m, seed)) for m in ms for seed in range(trials)]
    else:
        raise ValueError(f"unknown suite {suite!r}")
    return _run(tasks, jobs)


def summarize(rows: Iterable[dict]) -> list[dict]:
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        if r.get("time_ms", "") == "":
            continue
        groups.setdefault((r["suite"], r.get("m", ""), r.get("planner", ""), r.get("kind", "")), []).append(r)
    out = []
    for (suite, m, planner, kind), rs in sorted(groups.items(), key=lambda kv: tuple(map(str, kv[0]))):
        ts = [float(r["time_ms"]) for r in rs]
        out.append(dict(suite=suite, m=m, planner=planner, kind=kind, trials=len(rs),
                        mean_ms=statistics.fmean(ts), std_ms=statistics.pstdev(ts),
                        passages=statistics.fmean(float(r["passages"]) for r in rs) if rs[0].get("passages") not in
                        (None, "") else ""))
    return out


def write_csv(rows: Sequence[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=FIELDS, extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: r.get(k, "") for k in FIELDS})
