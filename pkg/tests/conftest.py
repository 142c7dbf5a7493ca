import numpy as np
import pytest

from hjkit.grid import Grid2D


def assert_one_pass(stats):
    """Every node accepted once, keys non-decreasing, legal state transitions."""
    stats.check_one_pass()
    assert stats.pops + stats.seeded == stats.n_nodes - stats.unreachable


def radial_error(U, grid, src=(0.0, 0.0), band=2.0):
    X, Y = grid.meshgrid()
    r = np.hypot(X - src[0], Y - src[1])
    far = r > band * max(grid.hx, grid.hy)
    return float(np.max(np.abs(np.asarray(U).reshape(grid.shape) - r)[far]))


@pytest.fixture
def unit_grid():
    return Grid2D(11, 11)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one pass/fail line per acceptance criterion."""
    def _report(num, title, ok, detail=""):
        line = f"criterion {num:>2} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
