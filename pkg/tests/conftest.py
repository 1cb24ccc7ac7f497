import functools

import pytest

from genmono import BURGERS, SchemeConfig, run
from genmono.suite import SUITE_STEPS, random_bv_state

SUITE_SEEDS = range(100)

# filled by test_acceptance, printed after the run
ACCEPTANCE_LINES: dict[str, str] = {}


@functools.lru_cache(maxsize=None)
def suite_histories(scheme: str, Q: float = 1.0, cfl_target: float = 0.25, seeds: int = len(SUITE_SEEDS)):
    cfg = SchemeConfig(scheme, Q=Q, cfl_target=cfl_target)
    return tuple(run(random_bv_state(seed), cfg, BURGERS, steps=SUITE_STEPS) for seed in range(seeds))


@pytest.fixture(scope="session")
def suite():
    return suite_histories


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES, key=lambda k: (int(k.split(".")[0]), k)):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
