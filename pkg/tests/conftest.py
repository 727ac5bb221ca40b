import json
import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

DATA = os.path.join(os.path.dirname(__file__), "data", "frozen_oracles.json")


@pytest.fixture(scope="session")
def frozen():
    with open(DATA) as fh:
        return json.load(fh)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(LINES, key=lambda s: int(s[1:])):
            terminalreporter.write_line(LINES[key])
