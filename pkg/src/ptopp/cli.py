"""Command line: ``ptopp detect | plan | bench | oracle``.

Options may also come from a TOML file (``--config``); flags given on the
command line win over the file, which wins over the defaults.  ``PTOPP_SEED``
replaces the default seed.

Exit codes: 0 ok, 1 oracle mismatch, 2 usage or parse error, 3 invalid input,
4 internal error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path
from typing import Any, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import bench
from .cells import compound_cells_3d, detect_cells
from .costs import CostSpec
from .env import GenSpec, Scenario, generate, load, to_dict, validate
from .errors import InObstacle, InvariantViolation, NoPathFound, OutOfBounds, ParseError, PtoppError, ScenarioError
from .passages import detect_2d, detect_3d, to_json
from .planners import PlanConfig, plan, run_baseline
from .svg import render

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3, 4

DEFAULTS: dict[str, Any] = {
    "m": 40,
    "seed": 0,
    "side_min": 20.0,
    "side_max": 60.0,
    "placement": "uniform",
    "walls": True,
    "kgd": 2,
    "planner": "rrt",
    "cost": "gpw",
    "q": 3,
    "ratio": 100.0,
    "cpw_eps": None,
    "cpw_mode": "relabel",
    "penalty": 1e6,
    "samples": 2000,
    "eta": None,
    "walk": "cell",
    "clearance": 10.0,
}


class Usage(Exception):
    pass


def _default_seed() -> int:
    env = os.environ.get("PTOPP_SEED")
    if env is None or env == "":
        return DEFAULTS["seed"]
    try:
        return int(env)
    except ValueError:
        raise Usage(f"PTOPP_SEED must be an integer, got {env!r}") from None


def _settings(args: argparse.Namespace) -> dict[str, Any]:
    """Merge flags over the TOML config over the defaults."""
    cfg: dict[str, Any] = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, "rb") as fh:
                raw = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ParseError(f"cannot read config {args.config}: {exc}") from exc
        for section in ("scenario", "plan", "cost"):
            cfg.update(raw.pop(section, {}) or {})
        cfg.update(raw)
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        unknown = set(cfg) - set(DEFAULTS) - {"x0", "xg", "scenario", "dims"}
        if unknown:
            raise Usage(f"unknown config keys: {', '.join(sorted(unknown))}")
    out = dict(DEFAULTS)
    out["seed"] = _default_seed()
    out.update(cfg)
    for k, v in vars(args).items():
        if v is not None and k not in ("func", "config"):
            out[k] = v
    return out


def _scenario(opts: dict[str, Any], dims: int) -> Scenario:
    path = opts.get("scenario")
    if path:
        s = load(path)
    else:
        s = generate(GenSpec(m=int(opts["m"]), side_range=(float(opts["side_min"]), float(opts["side_max"])),
                             placement=opts["placement"], dims=dims, seed=int(opts["seed"]),
                             walls=bool(opts["walls"])))
    if not s.regular:
        raise InvariantViolation("scenario has no obstacles", -1)
    return s


def _write(path: str | None, text: str) -> None:
    if path is None:
        return
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"


def _finite(v: float) -> float | None:
    return v if math.isfinite(v) else None


def _point(text: str | Sequence[float] | None) -> tuple[float, ...] | None:
    if text is None:
        return None
    if isinstance(text, str):
        try:
            return tuple(float(v) for v in text.split(","))
        except ValueError:
            raise Usage(f"bad point {text!r}; expected x,y or x,y,z") from None
    return tuple(float(v) for v in text)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_detect(args: argparse.Namespace) -> int:
    opts = _settings(args)
    dims = 3 if opts.get("three_d") else 2
    s = _scenario(opts, dims)
    validate(s)
    t = time.perf_counter()
    if s.dims == 3:
        ps = detect_3d(s, int(opts["kgd"]))
        cx = compound_cells_3d(ps, s)
    else:
        ps = detect_2d(s, int(opts["kgd"]))
        cx = detect_cells(ps, s)
    elapsed = time.perf_counter() - t
    print(f"obstacles {len(s.regular)}  passages {len(ps)}  cells {cx.n_free}  time {elapsed * 1e3:.1f} ms")
    doc: dict[str, Any] = {"passages": _passages_json(ps), "cells": cx.to_json()}
    if s.dims == 3:
        base = detect_2d(_planar(s), int(opts["kgd"]))
        ratio = len(ps) / len(base) if base else float("nan")
        print(f"base passages {len(base)}  spatial passages {len(ps)}  ratio {ratio:.3f}")
        doc["base_passages"] = len(base)
        doc["scene"] = to_dict(s)
    _write(opts.get("json"), _dump(doc))
    if opts.get("svg"):
        _write(opts["svg"], render(s, ps, cx))
    return EXIT_OK


def _planar(s: Scenario) -> Scenario:
    from .passages import _planar as planar

    return planar(s)


def _passages_json(ps) -> list[dict]:
    out = []
    for p, d in zip(ps, to_json(ps)):
        d = dict(d)
        d["pid"] = p.pid
        if "h_interval" in d:
            d["h_interval"] = [p.h_lo, _finite(p.h_hi)]
        out.append(d)
    return out


def _cost_spec(opts: dict[str, Any]) -> CostSpec:
    kind = opts["cost"]
    eps = opts.get("cpw_eps")
    if kind == "cpw":
        kind = "gpw"
        if eps is None:
            raise Usage("--cost cpw needs --eps")
    if kind == "clearance":
        kind = "shortest"
    return CostSpec(kind, q=int(opts["q"]), ratio=float(opts["ratio"]),
                    cpw_eps=None if eps is None else float(eps), cpw_mode=opts["cpw_mode"],
                    penalty=float(opts["penalty"]))


def cmd_plan(args: argparse.Namespace) -> int:
    opts = _settings(args)
    dims = 3 if opts.get("three_d") else 2
    s = _scenario(opts, dims)
    validate(s)
    if s.dims == 3:
        ps = detect_3d(s, int(opts["kgd"]))
        cx = compound_cells_3d(ps, s)
    else:
        ps = detect_2d(s, int(opts["kgd"]))
        cx = detect_cells(ps, s)
    d0, dg = bench.corners(s)
    x0 = _point(opts.get("x0")) or d0
    xg = _point(opts.get("xg")) or dg
    spec = _cost_spec(opts)
    cfg = PlanConfig(x0, xg, spec, planner=opts["planner"], samples=int(opts["samples"]),
                     eta=None if opts["eta"] is None else float(opts["eta"]), seed=int(opts["seed"]),
                     walk=opts["walk"])
    if opts["cost"] == "clearance":
        result = run_baseline("clearance", s, ps, cx, cfg, clearance=float(opts["clearance"]))
    else:
        result = plan(s, ps, cx, cfg)
    doc = result.to_dict(timing=bool(opts.get("timing")))
    doc["x0"] = list(x0)
    doc["xg"] = list(xg)
    doc["scenario_seed"] = s.seed
    doc["plan_seed"] = cfg.seed
    if s.dims == 3:
        doc["scene"] = to_dict(s)
        doc["scene_passages"] = _passages_json(ps)
    text = _dump(doc)
    _write(opts.get("json") or "-", text)
    if opts.get("svg"):
        _write(opts["svg"], render(s, ps, cx, [result.path], endpoints=[x0, xg]))
    if result.status != "ok":
        print(f"status {result.status}", file=sys.stderr)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    opts = _settings(args)
    ms = [int(v) for v in str(opts.get("ms") or opts["m"]).split(",")]
    rows = bench.run_suite(args.suite, ms=ms, trials=int(opts.get("trials") or 5),
                           samples=int(opts["samples"]), planner=opts["planner"], jobs=int(opts.get("jobs") or 1),
                           scenario_seed=int(opts["seed"]))
    if opts.get("out"):
        bench.write_csv(rows, opts["out"])
    for r in bench.summarize(rows):
        print(f"{r['suite']:9s} m={r['m']!s:4s} {r['planner']!s:8s} {r['kind']!s:16s} n={r['trials']:3d} "
              f"mean {r['mean_ms']:9.2f} ms  std {r['std_ms']:8.2f}")
    failed = [r for r in rows if r.get("suite") == "error"]
    if failed:
        print(f"{len(failed)} trial(s) failed", file=sys.stderr)
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    from . import oracle

    opts = _settings(args)
    ok, report = oracle.run(args.target, opts)
    print(("PASS" if ok else "FAIL") + f" {args.target}: {report['summary']}")
    if not ok:
        print(_dump(report["counterexample"]), end="")
    return EXIT_OK if ok else EXIT_MISMATCH


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", help="scenario JSON file (otherwise one is generated)")
    p.add_argument("--m", type=int, help="number of obstacles to generate")
    p.add_argument("--seed", type=int, help="scenario and planner seed")
    p.add_argument("--side-min", dest="side_min", type=float)
    p.add_argument("--side-max", dest="side_max", type=float)
    p.add_argument("--placement", choices=["uniform", "gaussian"])
    p.add_argument("--no-walls", dest="walls", action="store_const", const=False)
    p.add_argument("--3d", dest="three_d", action="store_true", default=None)
    p.add_argument("--kgd", type=int, help="geodesic distance bound for candidate pairs")
    p.add_argument("--config", help="TOML file with default options")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ptopp", description="Passage-traversing optimal path planning")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="detect passages and cells")
    _scenario_flags(p)
    p.add_argument("--svg")
    p.add_argument("--json")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("plan", help="plan one path")
    _scenario_flags(p)
    p.add_argument("--planner", choices=["rrt", "prm"])
    p.add_argument("--cost", choices=["shortest", "mpw", "gpw", "maxclr", "clearance", "cpw", "lensum"])
    p.add_argument("--q", type=int)
    p.add_argument("--ratio", type=float)
    p.add_argument("--eps", dest="cpw_eps", type=float, help="CPW width threshold")
    p.add_argument("--cpw-mode", dest="cpw_mode", choices=["relabel", "penalty"])
    p.add_argument("--penalty", type=float)
    p.add_argument("--clearance", type=float, help="sample clearance floor for --cost clearance")
    p.add_argument("--samples", type=int)
    p.add_argument("--eta", type=float)
    p.add_argument("--walk", choices=["cell", "traversal"])
    p.add_argument("--x0")
    p.add_argument("--xg")
    p.add_argument("--svg")
    p.add_argument("--json", help="output file, '-' for stdout (default)")
    p.add_argument("--timing", action="store_true", default=None, help="include wall-clock time in the JSON")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("bench", help="run a benchmark suite")
    p.add_argument("suite", choices=["detect", "plan", "evolution", "kernels"])
    p.add_argument("--m", dest="ms", help="comma-separated obstacle counts")
    p.add_argument("--trials", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--planner", choices=["rrt", "prm"])
    p.add_argument("--seed", type=int, help="scenario seed for plan suites")
    p.add_argument("--jobs", type=int)
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("oracle", help="check fast paths against brute-force oracles")
    p.add_argument("target", choices=["passages", "cells", "walk", "costs"])
    _scenario_flags(p)
    p.add_argument("--seeds", type=int, help="number of scenario seeds")
    p.add_argument("--edges", type=int, help="random edges for the walk target")
    p.add_argument("--trials", type=int, help="randomized trials for the costs target")
    p.add_argument("--cells-file", dest="cells_file", help="cell JSON to verify against recomputation")
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except (Usage, ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ScenarioError, InObstacle, OutOfBounds) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NoPathFound as exc:
        print(f"no path: {exc}", file=sys.stderr)
        return EXIT_OK
    except PtoppError as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
