import os

import pytest
from hypothesis import HealthCheck, settings

from ptopp.cells import detect_cells
from ptopp.env import GenSpec, generate
from ptopp.passages import detect_2d

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def world40():
    s = generate(GenSpec(m=40, seed=3))
    ps = detect_2d(s)
    return s, ps, detect_cells(ps, s)


@pytest.fixture(scope="session")
def world20():
    s = generate(GenSpec(m=20, seed=11))
    ps = detect_2d(s)
    return s, ps, detect_cells(ps, s)


_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance line; printed again in the terminal summary."""

    def record(label: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
        _CRITERIA.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
