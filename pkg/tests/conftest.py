import pytest
from hypothesis import HealthCheck, settings

from qpoker import strategic_games as sg

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# filled by test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def sp_game():
    return sg.builtin_game("sp")


@pytest.fixture(scope="session")
def ns_game():
    return sg.builtin_game("ns")


@pytest.fixture(scope="session")
def pd_game():
    return sg.builtin_game("pd")


@pytest.fixture(scope="session")
def chicken_game():
    return sg.builtin_game("chicken")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
