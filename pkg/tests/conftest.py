import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from phasetomo import _backend

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=150, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_criteria: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k, title): acceptance criterion k")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=_backend.available())
def kernel_module(request):
    return _backend.load(request.param)


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    k, title = marker.args
    _criteria[k] = (title, "PASS" if call.excinfo is None else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_criteria):
        title, status = _criteria[k]
        terminalreporter.write_line(f"{status}  criterion {k:2d}: {title}")
