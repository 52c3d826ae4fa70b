import pytest


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if report.when == "call" and marker:
        report.criterion = marker.args


def pytest_terminal_summary(terminalreporter):
    rows = []
    for status in ("passed", "failed"):
        for rep in terminalreporter.stats.get(status, []):
            criterion = getattr(rep, "criterion", None)
            if criterion is not None:
                detail = dict(rep.user_properties).get("detail", "")
                rows.append((criterion, "PASS" if rep.passed else "FAIL", detail))
    if rows:
        terminalreporter.section("acceptance criteria")
        for (number, name), status, detail in sorted(rows):
            terminalreporter.write_line(f"{status}  [{number}] {name}: {detail}")
