from __future__ import annotations

import pytest

from hjbolza.problems import get_problem
from hjbolza.value_grid import GridSpec, solve_semilagrangian

CRITERIA: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    prev = CRITERIA.get(number)
    if prev is not None:
        passed = passed and prev[0]
        detail = prev[1] + "; " + detail
    CRITERIA[number] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"CRITERION {n}: {'PASS' if ok else 'FAIL'} | {detail}")


@pytest.fixture(scope="session")
def small_x2_grid():
    return solve_semilagrangian(get_problem("quadratic_x2"), GridSpec(1.0, 64, [(-2.0, 2.0)], [129]))


@pytest.fixture(scope="session")
def small_step_grid():
    return solve_semilagrangian(get_problem("step"), GridSpec(1.0, 64, [(-2.0, 2.0)], [129]))
