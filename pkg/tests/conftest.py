from __future__ import annotations

import pytest

from vdwmodes.dielectrics import DielectricModel, gold


@pytest.fixture(scope="session")
def au():
    return gold()


@pytest.fixture(scope="session")
def au0():
    """Undamped gold, for mode-sum energies."""
    return gold(damping_ev=0.0)


@pytest.fixture(scope="session")
def drude1():
    """Undamped Drude metal with omega_p = 1 rad/s."""
    return DielectricModel.drude(1.0)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
