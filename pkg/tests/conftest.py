import pytest

_verdicts: list[tuple[str, str, str]] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or not marker.args:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        label = marker.args[0]
        suffix = item.callspec.id if hasattr(item, "callspec") else ""
        verdict = "PASS" if report.passed else "FAIL"
        _verdicts.append((label, suffix, verdict))


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for label, suffix, verdict in _verdicts:
        name = f"{label} [{suffix}]" if suffix else label
        terminalreporter.write_line(f"{verdict}  {name}")
