import pytest

from defdirac.params import DeformationParams, PhysicalConstants


@pytest.fixture
def natural():
    return PhysicalConstants(e2=0.5)


@pytest.fixture
def deformed(natural):
    return DeformationParams.build(natural, 0.01, a=0.02)


# one summary line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
