import pytest

from dslicer import fixture_text, load_p1

ACCEPTANCE_LINES = []


@pytest.fixture
def p1_text():
    return fixture_text("p1.ir")


@pytest.fixture
def p1():
    return load_p1()[0]


@pytest.fixture
def cfg():
    return load_p1()[1]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
