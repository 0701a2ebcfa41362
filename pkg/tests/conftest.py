"""Shared pytest hooks for the test suite."""

import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Replay the acceptance verdict lines after the run.

    Stdout of passing tests is captured and discarded by default, so the
    one-line-per-criterion verdicts printed by tests/test_acceptance.py are
    echoed here, where output goes straight to the terminal.
    """
    module = sys.modules.get("test_acceptance")
    verdicts = getattr(module, "VERDICTS", None)
    if not verdicts:
        return
    terminalreporter.ensure_newline()
    terminalreporter.section("acceptance criteria", sep="=")
    for line in verdicts:
        terminalreporter.line(line)
