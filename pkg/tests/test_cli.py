import json
import os
import subprocess
import sys

import pytest

from ptopp import cli
from ptopp.env import GenSpec, Scenario, generate, save


def run(*args, env=None):
    e = dict(os.environ)
    e.pop("PTOPP_SEED", None)
    e.update(env or {})
    return subprocess.run([sys.executable, "-m", "ptopp.cli", *args], capture_output=True, text=True, env=e)


def test_plan_json_and_exit_ok(capsys):
    assert cli.main(["plan", "--m", "20", "--seed", "1", "--samples", "500"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["status"] == "ok" and doc["scenario_seed"] == 1
    assert "time_ms" not in doc


def test_timing_flag(capsys):
    cli.main(["plan", "--m", "20", "--seed", "1", "--samples", "300", "--timing"])
    assert "time_ms" in json.loads(capsys.readouterr().out)


def test_byte_identical():
    a = run("plan", "--m", "30", "--seed", "5", "--samples", "600")
    b = run("plan", "--m", "30", "--seed", "5", "--samples", "600")
    assert a.returncode == 0 and a.stdout == b.stdout and a.stdout


def test_env_seed():
    a = run("plan", "--m", "20", "--samples", "300", env={"PTOPP_SEED": "7"})
    b = run("plan", "--m", "20", "--samples", "300", "--seed", "7")
    assert json.loads(a.stdout)["scenario_seed"] == 7
    assert a.stdout == b.stdout
    assert run("plan", env={"PTOPP_SEED": "x"}).returncode == 2


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("[scenario]\nm = 20\nseed = 3\n[plan]\nsamples = 300\n")
    assert cli.main(["plan", "--config", str(cfg)]) == 0
    assert json.loads(capsys.readouterr().out)["scenario_seed"] == 3
    assert cli.main(["plan", "--config", str(cfg), "--seed", "4"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["scenario_seed"] == 4 and doc["samples"] <= 300
    bad = tmp_path / "bad.toml"
    bad.write_text("bogus = 1\n")
    assert cli.main(["plan", "--config", str(bad)]) == 2


def test_usage_errors():
    assert cli.main(["plan", "--x0", "a,b"]) == 2
    assert cli.main(["nope"]) == 2
    assert cli.main(["plan", "--cost", "cpw"]) == 2


def test_input_errors(tmp_path):
    assert cli.main(["plan", "--scenario", str(tmp_path / "missing.json")]) == 2
    empty = tmp_path / "empty.json"
    save(Scenario(2, (1000.0, 600.0), ()), empty)
    assert cli.main(["plan", "--scenario", str(empty)]) == 3
    s = generate(GenSpec(m=10, seed=0))
    path = tmp_path / "s.json"
    save(s, path)
    inside = ",".join(str(v) for v in s.regular[0].centroid)
    assert cli.main(["plan", "--scenario", str(path), "--x0", inside, "--samples", "100"]) == 3
    assert cli.main(["plan", "--scenario", str(path), "--x0=-50,-50", "--samples", "100"]) == 3


def test_internal_error(monkeypatch):
    assert cli.main(["plan", "--m", "0"]) == 2

    def boom(*a, **k):
        raise RuntimeError("boom")

    monkeypatch.setattr(cli, "detect_2d", boom)
    assert cli.main(["plan", "--m", "5"]) == 4


def test_detect_outputs(tmp_path, capsys):
    j, svg = tmp_path / "d.json", tmp_path / "d.svg"
    assert cli.main(["detect", "--m", "20", "--seed", "2", "--json", str(j), "--svg", str(svg)]) == 0
    doc = json.loads(j.read_text())
    assert doc["passages"] and doc["cells"]
    assert svg.read_text().startswith("<svg")
    assert "passages" in capsys.readouterr().out


def test_detect_3d(tmp_path, capsys):
    j = tmp_path / "d.json"
    assert cli.main(["detect", "--3d", "--m", "15", "--seed", "2", "--json", str(j)]) == 0
    doc = json.loads(j.read_text())
    assert doc["base_passages"] > 0 and "h_interval" in doc["passages"][0]


def test_oracle_pass_and_corrupt(tmp_path, capsys):
    assert cli.main(["oracle", "walk", "--m", "20", "--seeds", "1", "--edges", "300"]) == 0
    assert capsys.readouterr().out.startswith("PASS")
    j = tmp_path / "d.json"
    cli.main(["detect", "--m", "20", "--seed", "0", "--json", str(j)])
    capsys.readouterr()
    assert cli.main(["oracle", "cells", "--m", "20", "--seed", "0", "--cells-file", str(j)]) == 0
    capsys.readouterr()
    doc = json.loads(j.read_text())
    doc["cells"][1]["neighbors"] = []
    j.write_text(json.dumps(doc))
    assert cli.main(["oracle", "cells", "--m", "20", "--seed", "0", "--cells-file", str(j)]) == 1
    out = capsys.readouterr().out
    assert out.startswith("FAIL") and "{" in out


def test_bench_csv(tmp_path):
    out = tmp_path / "b.csv"
    assert cli.main(["bench", "detect", "--m", "20", "--trials", "2", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) >= 3 and "time_ms" in lines[0]
