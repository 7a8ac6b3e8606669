import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from pointcutmix.core import PointCloud

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def random_cloud(rng: np.random.Generator, n: int) -> PointCloud:
    return PointCloud(rng.standard_normal((n, 3)).astype(np.float32))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


# Scorecard plumbing: tests marked @pytest.mark.criterion(num, description)
# get one PASS/FAIL line in a summary block after the run.
_SCORECARD = pytest.StashKey()


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(num, description): acceptance scorecard entry"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    num, description = marker.args
    status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
    item.config.stash.setdefault(_SCORECARD, []).append((num, status, description))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    entries = config.stash.get(_SCORECARD, None)
    if not entries:
        return
    terminalreporter.section("acceptance criteria")
    for num, status, description in sorted(entries):
        terminalreporter.write_line(f"{status}: criterion {num:2d} — {description}")
