from __future__ import annotations

import helpers


def pytest_terminal_summary(terminalreporter):
    lines = helpers.ACCEPTANCE_LINES
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(lines):
        terminalreporter.write_line(lines[num])
