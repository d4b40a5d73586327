import numpy as np
import pytest

ACCEPTANCE_LINES = []


def record_criterion(number, passed, detail):
    line = f"criterion {number} {'PASS' if passed else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_block(rng, n, count=None):
    shape = (n,) if count is None else (count, n)
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
