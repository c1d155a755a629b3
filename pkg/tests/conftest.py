"""Shared pytest hooks: surface the acceptance verdict lines.

Capture would swallow lines printed by passing tests, so the acceptance
tests record their one-line verdicts here and a terminal-summary hook
prints them after the run.
"""

_acceptance_lines: list[str] = []


def record_acceptance_line(line: str) -> None:
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
