import pytest

from tests import shared
from zenolab.model import custom_params, hydrogen_params
from zenolab.resolvent import find_pole


@pytest.fixture(scope="session")
def hydrogen():
    return hydrogen_params()


@pytest.fixture(scope="session")
def hydrogen_pole(hydrogen):
    return find_pole(hydrogen)


@pytest.fixture(scope="session")
def synthetic():
    return custom_params(**shared.SYNTHETIC)


@pytest.fixture(scope="session")
def synthetic_pole(synthetic):
    return find_pole(synthetic)


@pytest.fixture(scope="session")
def synthetic_eigendata(synthetic):
    return shared.synthetic_eigendata()[1]


def pytest_terminal_summary(terminalreporter):
    if shared.LINES:
        terminalreporter.section("acceptance criteria")
        for line in shared.LINES:
            terminalreporter.write_line(line)
