import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from patchygsl.grid_world import GridWorld, empty_world

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
DATA = Path(__file__).resolve().parent / "data"


@pytest.fixture
def open_world():
    return empty_world(4.0, 3.0, 0.2, (1.1, 1.5))


def wall_world(n=10, cs=1.0, gap_row=7):
    """n x n cells with a vertical wall at column n//2 pierced by one gap."""
    occ = np.zeros((n, n), dtype=bool)
    occ[:, n // 2] = True
    occ[gap_row, n // 2] = False
    return GridWorld(n * cs, n * cs, cs, occ, (0.5 * cs, 0.5 * cs))


@pytest.fixture
def walled():
    return wall_world()


# -- acceptance reporting ------------------------------------------------------
_VERDICTS: dict[int, tuple[bool, str]] = {}


class Criterion:
    def __init__(self, number: int, title: str):
        self.number, self.title, self.detail = number, title, ""

    def note(self, text: str) -> None:
        self.detail = text


@pytest.fixture
def criterion(request):
    """Records PASS/FAIL for the acceptance criterion named by the test's marker."""
    mark = request.node.get_closest_marker("criterion")
    c = Criterion(*mark.args)
    yield c
    failed = getattr(request.node, "rep_call", None)
    ok = failed is not None and failed.passed
    _VERDICTS[c.number] = (ok, f"{c.title}: {c.detail}")
    print(f"\nCRITERION {c.number} {'PASS' if ok else 'FAIL'} - {c.title}: {c.detail}")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config.addinivalue_line("markers", "slow: long-running end-to-end batch")


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_VERDICTS):
        ok, text = _VERDICTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {text}")
