"""Prints one PASS/FAIL line per acceptance criterion at the end of the run."""
import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title, budget): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title, budget = mark.args
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _RESULTS[number] = (title, budget, rep.outcome, rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, budget, outcome, duration = _RESULTS[number]
        status = "PASS" if outcome == "passed" else "FAIL"
        tr.write_line(f"[{status}] criterion {number:>2}: {title} ({duration:.2f} s, budget {budget} s)")
