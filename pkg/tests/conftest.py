import numpy as np
import pytest

from starqfi.io import load_cached_ut
from starqfi.states import StrConfig
from starqfi.tomography import OptimizerConfig

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def cfg4():
    return StrConfig.from_gamma_ratio(4, 1e-3)


@pytest.fixture(scope="session")
def ut4(cfg4):
    ut = load_cached_ut(cfg4, OptimizerConfig())
    assert ut is not None, "packaged tomography unitary missing"
    return ut


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
        terminalreporter.write_line(line)
