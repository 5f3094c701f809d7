import mpmath as mp
import pytest


@pytest.fixture(autouse=True)
def _reset_mpmath_precision():
    yield
    mp.mp.dps = 15


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one summary line per acceptance criterion."""

    def _report(criterion: int, passed: bool, detail: str):
        ACCEPTANCE_LINES.append((criterion, passed, detail))

    return _report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(ACCEPTANCE_LINES, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {criterion:>2d}: {'PASS' if passed else 'FAIL'}  {detail}")
