"""Collects acceptance verdicts and prints them after the test session."""

_verdicts = []


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    for key, value in report.user_properties:
        if key == "criterion":
            _verdicts.append((value, "PASS" if report.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for (num, title, detail), status in sorted(_verdicts, key=lambda v: v[0][0]):
        terminalreporter.write_line(f"criterion {num:>2} {status}: {title} ({detail})")
