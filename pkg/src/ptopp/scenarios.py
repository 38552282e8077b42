"""Hand-built scenarios used by regression tests and examples."""

from __future__ import annotations

from .env import Obstacle, Scenario, walls_to_obstacles
from .geom import rectangle

TRADEOFF_WEIGHT = 5.0


def _scene(rects: list[tuple[float, float, float, float]], extent=(1000.0, 600.0)) -> Scenario:
    obs = tuple(Obstacle(k, rectangle(*r)) for k, r in enumerate(rects))
    return walls_to_obstacles(Scenario(2, extent, obs, False, 0))


def tradeoff_scenario() -> tuple[Scenario, dict]:
    """Two barriers showing that ``len - w * f_p`` is not order preserving.

    The first barrier (x = 300) has a wide gap A (100) and a narrow gap B
    (40) on the straight line; the second (x = 700) has one narrow gap C (40).
    Reaching the midpoint through A scores better under the trade-off cost,
    yet every full path crosses C, so the shorter route through B is the
    global optimum.
    """
    rects = [
        (290.0, 5.0, 310.0, 280.0),
        (290.0, 320.0, 310.0, 430.0),
        (290.0, 530.0, 310.0, 595.0),
        (690.0, 5.0, 710.0, 280.0),
        (690.0, 320.0, 710.0, 595.0),
    ]
    s = _scene(rects)
    x0, xm, xg = (100.0, 300.0), (500.0, 300.0), (900.0, 300.0)
    paths = {
        "x0": x0,
        "xm": xm,
        "xg": xg,
        "via_a": [x0, (280.0, 480.0), (320.0, 480.0), xm],
        "via_b": [x0, xm],
        "tail": [xm, xg],
        "weight": TRADEOFF_WEIGHT,
        "widths": {"A": 100.0, "B": 40.0, "C": 40.0},
    }
    return s, paths


def corridor_scenario(width: float = 80.0) -> Scenario:
    """A horizontal corridor of the given width between two long blocks."""
    lo = 300.0 - width / 2
    hi = 300.0 + width / 2
    return _scene([(100.0, 5.0, 900.0, lo), (100.0, hi, 900.0, 595.0)])
