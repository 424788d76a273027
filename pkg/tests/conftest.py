"""Per-criterion PASS/FAIL summary for tests marked ``criterion(n, title, budget)``."""

from collections import defaultdict

import pytest

_results = defaultdict(list)
_titles = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n, title, budget = marker.args
    _titles[n] = (title, budget)
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _results[n].append((item.name, report.passed, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        title, budget = _titles[n]
        cases = _results[n]
        passed = sum(ok for _, ok, _ in cases)
        spent = sum(d for _, _, d in cases)
        status = "PASS" if passed == len(cases) else "FAIL"
        line = f"criterion {n}: {status}  {title}  ({passed}/{len(cases)} cases, {spent:.2f} s of {budget:g} s)"
        failing = [name for name, ok, _ in cases if not ok]
        if failing:
            line += "  failing: " + ", ".join(failing)
        terminalreporter.write_line(line)
