import _report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _report.LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_report.LINES):
            terminalreporter.write_line(line)
