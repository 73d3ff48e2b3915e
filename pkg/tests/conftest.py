import math

import pytest
from hypothesis import HealthCheck, settings

from timedecay.densities import ExpSumDensity
from timedecay.simulation import bin_events, sample_decays

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

GSI_LAM = 0.05
GSI_A = 0.20
GSI_OMEGA = 2 * math.pi / 7
GSI_PHI = 0.4


@pytest.fixture(scope="session")
def gsi_density():
    return ExpSumDensity.gsi(GSI_LAM, GSI_A, GSI_OMEGA, GSI_PHI)


@pytest.fixture(scope="session")
def gsi_events(gsi_density):
    return sample_decays(gsi_density, 1_000_000, seed=20240607)


@pytest.fixture(scope="session")
def gsi_hist(gsi_events):
    return bin_events(gsi_events, 0.5, 100.0)


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one acceptance line; shown in the terminal summary."""
    def _report(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
