import math

import pytest
from hypothesis import HealthCheck, settings

from kerrtrap.spacetime import BlackHoleParams

settings.register_profile(
    "kerrtrap", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("kerrtrap")

SCHW = BlackHoleParams(1.0, 0.0, 0.0)
SDS = BlackHoleParams(1.0, 0.0, 0.02)
KERR = BlackHoleParams(1.0, 0.5, 0.0)
KERR_FAST = BlackHoleParams(1.0, 0.9, 0.0)
KDS = BlackHoleParams(1.0, 0.5, 0.02)

HALF_PI = math.pi / 2


@pytest.fixture(params=[SCHW, SDS, KERR, KERR_FAST, KDS], ids=["schw", "sds", "kerr", "kerr09", "kds"])
def params(request):
    return request.param

# one line per acceptance criterion, shown after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
