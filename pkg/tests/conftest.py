import numpy as np
import pytest

from tugwar.core import GameParams, build_domain, interval, solve_value, unit_disk

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def fixture_domain():
    """Three-node interval fixture: nodes 0, 0.5, 1 with F(x) = x and f = 1."""
    params = GameParams(4, 1, 0.5)
    return build_domain(interval(0.0, 1.0), params, 0.5, lambda x: x[:, 0], 1.0,
                        check_resolution=False)


@pytest.fixture(scope="session")
def disk_domain():
    params = GameParams(4, 2, 0.1)
    return build_domain(unit_disk(), params, 0.025, lambda x: 1.0 + x[:, 0], 1.0)


@pytest.fixture(scope="session")
def disk_value(disk_domain):
    return solve_value(disk_domain, method="policy").field


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
