import pytest

from termbridge import ContextBuilder, Engine, PersonConverter, RefRegistry

_criteria = {}


@pytest.fixture
def registry():
    return RefRegistry()


@pytest.fixture
def engine(registry):
    return Engine(registry)


@pytest.fixture
def person_ctx(registry):
    return ContextBuilder.create().register(PersonConverter()).registry(registry).build()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.failed):
        _criteria[number] = (title, "PASS" if report.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, status = _criteria[number]
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {title}")
