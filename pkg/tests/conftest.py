import pytest

from direntropy.lattice import DirectionSpec
from direntropy.measures import MeasureModel
from direntropy.systems import SystemSpec

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def golden():
    return DirectionSpec.golden()


@pytest.fixture(scope="session")
def three_dot():
    return SystemSpec.three_dot()


@pytest.fixture(scope="session")
def haar(three_dot):
    return MeasureModel.haar(three_dot)


@pytest.fixture(scope="session")
def fair():
    return MeasureModel.uniform(2)


@pytest.fixture(scope="session")
def full_shift():
    return SystemSpec.full_shift(2)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
