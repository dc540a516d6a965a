import functools

import pytest

from tullock import fixed_prize, opf
from tullock.scenario import builtin_scenario

# filled by test_acceptance, echoed at the end of the run
ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def reference_scenario():
    return builtin_scenario("reference")


@functools.lru_cache(maxsize=None)
def opf_solution(nu: float, n: int = 2):
    return opf.solve_opf(reference_scenario().config(nu, n=n))


@functools.lru_cache(maxsize=None)
def benchmark_solution(nu: float, m: int = fixed_prize.DEFAULT_M):
    return fixed_prize.optimize(reference_scenario().config(nu), m=m)


@pytest.fixture(scope="session")
def scenario():
    return reference_scenario()


@pytest.fixture(scope="session")
def cfg1(scenario):
    return scenario.config(1.0)


@pytest.fixture(scope="session")
def sol1():
    return opf_solution(1.0)


@pytest.fixture(scope="session")
def bench1():
    return benchmark_solution(1.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
