import numpy as np
import pytest

from coopcsma.channel import PathLossLaw
from coopcsma.config import ScenarioConfig


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit_law():
    # 10 dBm, alpha 3.5, unit gain at 1 m
    return PathLossLaw(10.0, 3.5)


@pytest.fixture
def cfg():
    return ScenarioConfig()


_VERDICTS = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def verdict(pytestconfig):
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""
    lines = pytestconfig.stash.setdefault(_VERDICTS, [])

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append((number, line))
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
