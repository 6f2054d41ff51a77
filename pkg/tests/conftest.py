"""Collect acceptance outcomes and print one PASS/FAIL line per criterion."""

import pytest

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, label): acceptance criterion this test checks")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        number, label = mark.args
        detail = getattr(item, "criterion_detail", "")
        _CRITERIA[number] = (label, "PASS" if rep.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        label, status, detail = _CRITERIA[number]
        line = f"{status}  {number:>2}  {label}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
