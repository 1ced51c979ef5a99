"""Per-criterion summary for the acceptance suite.

Tests tagged ``@pytest.mark.criterion(n)`` are aggregated by criterion
number; a detail line can be attached with ``record_property("detail", ...)``.
At the end of the session one line per criterion is printed.
"""

import pytest

_results: dict[int, list[tuple[str, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n = marker.args[0]
    details = [v for k, v in item.user_properties if k == "detail"]
    if report.when == "call" or (report.when == "setup" and not report.passed):
        if report.skipped:
            reason = report.longrepr[2] if isinstance(report.longrepr, tuple) else ""
            _results.setdefault(n, []).append(("SKIP", reason.removeprefix("Skipped: ")))
        else:
            status = "PASS" if report.passed else "FAIL"
            detail = "; ".join(details) or item.name
            _results.setdefault(n, []).append((status, detail))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        entries = _results[n]
        statuses = {s for s, _ in entries}
        status = "FAIL" if "FAIL" in statuses else ("PASS" if "PASS" in statuses else "SKIP")
        detail = " | ".join(d for _, d in entries if d)
        terminalreporter.write_line(f"criterion {n}: {status} {detail}")
