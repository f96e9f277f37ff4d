"""Shared pytest wiring.

The acceptance tests register one verdict line per criterion; the
terminal-summary hook replays them after the test table so they are
visible even when output capture is on.
"""

VERDICT_LINES: list[str] = []


def record_verdict(line: str) -> None:
    VERDICT_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not VERDICT_LINES:
        return
    terminalreporter.section("acceptance verdicts")
    for line in VERDICT_LINES:
        terminalreporter.write_line(line)
