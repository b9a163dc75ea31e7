import numpy as np
import pytest

from svhmc.data import SyntheticSpec, generate_sv_series
from svhmc.model import SvParams

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture(scope="session")
def reference_series():
    """5000 returns from the generating parameters used for the artificial data."""
    y, h = generate_sv_series(SyntheticSpec(SvParams(mu=-1.0, phi=0.97, sigma_eta2=0.05), 5000, seed=1))
    return y, h


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
