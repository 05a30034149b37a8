"""Prints one pass/fail line per acceptance criterion at the end of the run."""

import re

_CRITERION = re.compile(r"test_acceptance\.py::test_c(\d+)_(\w+)$")
_outcomes: dict[int, dict] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    entry = _outcomes.setdefault(int(m.group(1)), {"name": m.group(2), "ok": True, "detail": ""})
    if report.failed:
        entry["ok"] = False
    for key, value in report.user_properties:
        if key == "detail":
            entry["detail"] = value


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_outcomes):
        e = _outcomes[k]
        status = "PASS" if e["ok"] else "FAIL"
        line = f"[{status}] criterion {k:2d} {e['name'].replace('_', ' ')}"
        if e["detail"]:
            line += f": {e['detail']}"
        terminalreporter.write_line(line)
