import functools

import pytest
from hypothesis import HealthCheck, settings

from besovtrace.domain import build_domain
from besovtrace.whitney import whitney_pipeline

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = {}


@functools.lru_cache(maxsize=None)
def domain(preset, h, theta=1.0):
    return build_domain(preset, h, theta)


@functools.lru_cache(maxsize=None)
def pipeline(preset, h):
    return whitney_pipeline(domain(preset, h))


@pytest.fixture(scope="session")
def halfplane():
    return domain("halfplane", 1 / 16)


@pytest.fixture(scope="session")
def halfplane_pipeline():
    return pipeline("halfplane", 1 / 16)


@pytest.fixture(scope="session")
def square():
    return domain("square", 1 / 16)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
