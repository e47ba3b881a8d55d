"""Prints a one-line PASS/FAIL verdict per acceptance criterion after the run."""
from __future__ import annotations

_verdicts: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criterion", mark.args))


def pytest_runtest_logreport(report):
    args = dict(report.user_properties).get("criterion")
    if args is None:
        return
    number, title = args
    if report.when == "call" or report.failed or (report.when == "setup" and report.skipped):
        previous = _verdicts.get(number, ("PASS", title))[0]
        verdict = "PASS" if report.passed and previous == "PASS" else "FAIL"
        if report.skipped:
            verdict = "SKIP"
        _verdicts[number] = (verdict, title)


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_verdicts):
        verdict, title = _verdicts[number]
        terminalreporter.write_line(f"{verdict}  criterion {number}: {title}")
