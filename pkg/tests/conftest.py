import math

import pytest

from articulated_parking import ControllerConfig, Gains, PolarState, RobotGeometry, run_scenario

PI = math.pi

# The four demonstration manoeuvres: (e, theta1, theta2, phi).
PARKING_STARTS = {
    "forward": (5.0, -PI / 4, -PI / 4, 0.0),
    "backward": (5.0, -PI / 4, PI, 0.0),
    "reverse-out": (5.0, 3 * PI / 4, PI, 0.0),
    "about-face": (5.0, PI, PI, 0.0),
}


@pytest.fixture(scope="session")
def geom():
    return RobotGeometry(0.1, 0.1)


@pytest.fixture(scope="session")
def gains():
    return Gains(1.0, 1.0, 1.0, 0.01)


@pytest.fixture(scope="session")
def parking_runs(geom, gains):
    """One closed-loop run per demonstration start, shared across modules."""
    cfg = ControllerConfig(gains)
    return {name: run_scenario(PolarState(*p), ctrl_cfg=cfg, geom=geom) for name, p in PARKING_STARTS.items()}


# Acceptance verdicts, one line per criterion, printed after the run.
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
