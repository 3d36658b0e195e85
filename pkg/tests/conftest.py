import pytest

from qdim.potential import Potential, ProbabilityVector

CANONICAL = (0.4, 0.35, 0.25)
UNIFORM = (1 / 3, 1 / 3, 1 / 3)


@pytest.fixture(scope="session")
def p_canonical():
    return ProbabilityVector.from_sequence(CANONICAL)


@pytest.fixture(scope="session")
def pot(p_canonical):
    return Potential(p_canonical)


@pytest.fixture(scope="session")
def pot_uniform():
    return Potential(ProbabilityVector.uniform())


_ACCEPTANCE_LINES = {}


@pytest.fixture
def report():
    """Record the one-line verdict of an acceptance criterion."""

    def record(number, result):
        verdict = "PASS" if result.passed else "FAIL"
        _ACCEPTANCE_LINES[number] = f"{verdict} criterion {number}: {result.line().split(' ', 1)[1]}"
        return result

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(_ACCEPTANCE_LINES[number])
