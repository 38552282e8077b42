import csv

import pytest

from ptopp import bench


def test_kernel_trial_both_backends():
    pytest.importorskip("ptopp._ckernels")
    rows = bench.kernel_trial(40, 0, edges=2000)["rows"]
    t = {(r["planner"], r["kind"]): r["time_ms"] for r in rows}
    assert {b for b, _ in t} == {"cython", "python"}
    for kind in ("brute_pairs", "segment_free", "cell_walk"):
        assert t["cython", kind] < t["python", kind]


def test_plan_suite_csv(tmp_path):
    rows = bench.run_suite("plan", ms=[20], trials=2, samples=300)
    assert len(rows) == 2 * len({r["kind"] for r in rows})
    out = tmp_path / "p.csv"
    bench.write_csv(rows, out)
    with open(out) as fh:
        got = list(csv.DictReader(fh))
    assert list(got[0]) == bench.FIELDS
    assert all(float(r["time_ms"]) >= 0 for r in got)
    summary = bench.summarize(rows)
    assert all(r["trials"] == 2 for r in summary)


def test_timed():
    v, t = bench.timed(sum, [1, 2, 3])
    assert v == 6 and t >= 0
