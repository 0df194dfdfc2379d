import os

import pytest
from hypothesis import HealthCheck, settings

from hyperbound import PotentialSpec

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def pt3():
    return PotentialSpec.from_couplings(f={2: -6.0})


@pytest.fixture
def scarf1():
    return PotentialSpec.from_couplings(g={2: 1.0})


# -- acceptance report ----------------------------------------------------------
ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def report():
    """Record ``criterion N: PASS|FAIL  detail`` for the terminal summary."""

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE[number] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
