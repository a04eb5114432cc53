from __future__ import annotations

import copy
import os

import pytest
from hypothesis import HealthCheck, settings

from nilcone.dataset import build_dataset, load_case

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=300, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def p4p4():
    return load_case("p4p4")


@pytest.fixture(scope="session")
def p3p3():
    return load_case("p3p3")


@pytest.fixture(scope="session")
def k3():
    return load_case("k3")


@pytest.fixture
def corrupt():
    """Rebuild a bundled case after editing a deep copy of its raw JSON."""

    def make(case: str, edit):
        raw = copy.deepcopy(load_case(case).raw)
        edit(raw)
        return build_dataset(raw, f"{case}[corrupted]")

    return make


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(LINES):
            terminalreporter.write_line(LINES[k])
