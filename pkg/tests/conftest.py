"""Collects the one-line verdicts of the acceptance criteria and prints them at the end."""
import acceptance_log


def pytest_terminal_summary(terminalreporter):
    if not acceptance_log.VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(acceptance_log.VERDICTS):
        ok, detail = acceptance_log.VERDICTS[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
