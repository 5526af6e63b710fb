import numpy as np
import pytest

from qclock.core import ChannelSpec, Grid1D
from qclock.spectral import WavepacketSpec

# criterion number -> one-line verdict, filled in by test_acceptance.py
ACCEPTANCE = {}


def record(number, ok, detail):
    ACCEPTANCE[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])


@pytest.fixture(scope="session")
def wp():
    """Truncated sine on [-2.01, -0.01] with the default clock."""
    return WavepacketSpec(-2.01, -0.01, p0=2.0, y0=0.0, dy=1.1)


@pytest.fixture(scope="session")
def fig1_channel():
    return ChannelSpec(2.0)


@pytest.fixture(scope="session")
def fig1_grid():
    return Grid1D(-40.0, 40.0, 2001)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
