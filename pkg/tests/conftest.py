"""Shared pytest wiring: an end-of-run acceptance criteria summary.

Tests that represent a top-level acceptance criterion call
``record_property("criterion", "<label>")`` as their first statement;
this hook prints one [PASS]/[FAIL] line per recorded criterion after
the normal test report, so the criteria outcomes are visible at a
glance in any full run.
"""

from __future__ import annotations

_results: list[tuple[str, str, str]] = []


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    criterion = None
    detail = ""
    for name, value in report.user_properties:
        if name == "criterion":
            criterion = str(value)
        elif name == "criterion_detail":
            detail = str(value)
    if criterion is not None:
        _results.append((criterion, report.outcome, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, outcome, detail in _results:
        status = "PASS" if outcome == "passed" else "FAIL"
        suffix = f" ({detail})" if detail else ""
        terminalreporter.write_line(f"[{status}] {criterion}{suffix}")
