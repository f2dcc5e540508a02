import numpy as np
import pytest

from maxent_moments.moments import FiniteDistribution, SupportWindow

_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    """Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_distribution(rng, max_states=12):
    left = int(rng.integers(0, 10))
    size = int(rng.integers(1, max_states + 1))
    w = rng.random(size) ** 3
    w[rng.integers(0, size)] += 0.1
    return FiniteDistribution.from_weights(SupportWindow(left, left + size - 1), w)
