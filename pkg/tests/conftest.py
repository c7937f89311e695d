import numpy as np
import pytest

from qnls.analysis import STANDARD_Q

_criteria: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        detail = dict(report.user_properties).get("verdict", "")
        _criteria[report.nodeid.split("::")[-1]] = (report.outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, (outcome, detail) in sorted(_criteria.items()):
        terminalreporter.write_line(detail or f"{'PASS' if outcome == 'passed' else 'FAIL'} {name}")


@pytest.fixture(params=STANDARD_Q, ids=[f"q{i}" for i in range(1, 8)])
def q(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
