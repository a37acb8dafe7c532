"""Shared test plumbing: the acceptance suite records one verdict line per
criterion and this hook prints them in the terminal summary, pass or fail."""

ACCEPTANCE_LINES: list = []


def record_verdict(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
