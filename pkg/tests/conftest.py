from __future__ import annotations

import pytest

from greenlrip.exact import enumerate_pareto
from greenlrip.instance import generate

TINY_SIZE = (2, 4, 3, 3)
TINY_N_MAX = 4
TINY_SEEDS = tuple(range(20))


@pytest.fixture(scope="session")
def tiny_instances():
    return [generate(TINY_SIZE, s) for s in TINY_SEEDS]


@pytest.fixture(scope="session")
def tiny_fronts(tiny_instances):
    return [enumerate_pareto(inst, TINY_N_MAX) for inst in tiny_instances]


def pytest_terminal_summary(terminalreporter):
    from report import VERDICTS

    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(VERDICTS):
        ok, detail = VERDICTS[criterion]
        terminalreporter.write_line(f"ACCEPTANCE {criterion} {'PASS' if ok else 'FAIL'}: {detail}")
