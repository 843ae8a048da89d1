import pytest

from structsel import fixtures
from structsel.varsets import VarRegistry


@pytest.fixture(scope="session")
def study_registry():
    return fixtures.study_registry()


@pytest.fixture(scope="session")
def study_rules(study_registry):
    return fixtures.study_rules(study_registry)


@pytest.fixture(scope="session")
def study_groups(study_registry):
    return fixtures.study_groups(study_registry)


@pytest.fixture
def abc():
    return VarRegistry(("A", "B", "C"))


@pytest.fixture
def fig1():
    # B1 and B2 are the dummies of one three-level factor
    return VarRegistry(("A", "B1", "B2", "AB1", "AB2"), bundles=(("B1", "B2"),))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[key])
