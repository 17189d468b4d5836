import pytest

_CRITERIA = {}
_OUTCOMES = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            number, title = mark.args
            _CRITERIA[number] = title


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark and (report.when == "call" or report.outcome != "passed"):
        number = mark.args[0]
        ok = report.outcome == "passed"
        _OUTCOMES[number] = _OUTCOMES.get(number, True) and ok


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        state = _OUTCOMES.get(number)
        label = "PASS" if state else ("FAIL" if state is False else "NOT RUN")
        terminalreporter.write_line(f"criterion {number}: {label}  {_CRITERIA[number]}")
