import pytest

from sextic_pinn.report import build_table
from sextic_pinn.trainer import TrainConfig, train

ACCEPTANCE_LINES: list[str] = []


class DefaultRuns:
    """Full-length default training runs, computed once per session."""

    def __init__(self):
        self._cache = {}

    def get(self, problem: str, seed: int = 42):
        key = (problem, seed)
        if key not in self._cache:
            params, history = train(TrainConfig(problem_name=problem, seed=seed))
            self._cache[key] = (params, history, build_table(params, _builtin(problem)))
        return self._cache[key]


def _builtin(name):
    from sextic_pinn.problem import builtin

    return builtin(name)


@pytest.fixture(scope="session")
def default_runs():
    return DefaultRuns()


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
