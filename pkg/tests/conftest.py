import pytest

from eosplan import kernels
from eosplan.model import make_instance

_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        state = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        _CRITERIA[number] = (state, title)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        state, title = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {state}  {title}")


@pytest.fixture
def tiny_a():
    """r0 attempts at t=0,10; r1 at t=8,20; d_acq=5, d_man=5, unit scores."""
    return make_instance([[0, 10], [8, 20]])


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    previous = kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(previous)
