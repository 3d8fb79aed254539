import functools
import math

import pytest

from salvo_sim.scenario import bundled_scenario_path, load_scenario, run_scenario


@functools.lru_cache(maxsize=None)
def scenario(name):
    return load_scenario(bundled_scenario_path(name))


@functools.lru_cache(maxsize=None)
def scenario_run(name, dt=None, decimate=None, **overrides):
    return run_scenario(scenario(name), dt=dt, decimate=decimate, **overrides)


@pytest.fixture(scope="session")
def sc1_run():
    return scenario_run("scenario1")


@pytest.fixture(scope="session")
def sc2_run():
    return scenario_run("scenario2")


@pytest.fixture(scope="session")
def sc3_run():
    return scenario_run("scenario3")


def deg(x):
    return math.radians(x)


ACCEPTANCE_LINES = []


def report(criterion, passed, detail):
    """Record one acceptance verdict; the lines are echoed again at the end of the session."""
    line = f"{'PASS' if passed else 'FAIL'}  criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
