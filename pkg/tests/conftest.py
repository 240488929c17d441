import numpy as np
import pytest

from simule.covariance import TaskData


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_task(rng, n, p, task_id=1):
    return TaskData(rng.standard_normal((n, p)), task_id=task_id)


_ACCEPTANCE = []


@pytest.fixture
def criterion(request):
    """Recorder for one acceptance line: ``criterion(number, ok, detail)``."""
    recorded = []

    def record(number, ok, detail):
        recorded.append(number)
        _ACCEPTANCE.append((number, bool(ok), detail))

    yield record
    if not recorded:
        _ACCEPTANCE.append((request.node.name, False, "errored before evaluation"))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(_ACCEPTANCE, key=lambda r: str(r[0])):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number}: {detail}")
