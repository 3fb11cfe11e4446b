import os
import time

import pytest
from hypothesis import HealthCheck, settings

from gsci.fixtures import FixtureSpec, shipped_fixtures

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def concentric_pair():
    return FixtureSpec("concentric", 1.0, 2.0, 0.7, nx=128).build()


@pytest.fixture(scope="session")
def mobius_pair():
    return shipped_fixtures(128)["mobius"].build()


_START = time.perf_counter()
SUITE_BUDGET_S = 120.0


def pytest_terminal_summary(terminalreporter):
    dt = time.perf_counter() - _START
    mark = "PASS" if dt < SUITE_BUDGET_S else "FAIL"
    terminalreporter.write_line(f"[suite runtime] {mark}  {dt:.1f} s (budget {SUITE_BUDGET_S:.0f} s)")
