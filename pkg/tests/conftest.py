"""Shared pytest hooks.

The acceptance module appends one line per criterion to ``ACCEPTANCE_LINES``;
they are repeated in the terminal summary so they appear even when output
capture hides the per-test prints.
"""

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
