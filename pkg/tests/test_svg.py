import re

from ptopp.bench import corners
from ptopp.costs import CostSpec
from ptopp.planners import PlanConfig, plan
from ptopp.svg import render


def test_deterministic_and_well_formed(world20):
    s, ps, cx = world20
    x0, xg = corners(s)
    r = plan(s, ps, cx, PlanConfig(x0, xg, CostSpec("gpw"), samples=300, seed=0))
    a = render(s, ps, cx, [r.path], endpoints=[x0, xg])
    b = render(s, ps, cx, [r.path], endpoints=[x0, xg])
    assert a == b
    assert a.startswith("<svg") and a.rstrip().endswith("</svg>")
    assert a.count("<polygon") >= len(s.obstacles)
    assert not re.search(r"\d\.\d{4,}", a)
