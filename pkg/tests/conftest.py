"""Collects one verdict line per acceptance criterion and prints them at the end of the run."""

ACCEPTANCE_LINES: dict = {}


def record_criterion(number: int, ok, detail: str) -> None:
    """``ok`` is True, False, or None for a criterion that could not be evaluated."""
    status = "SKIP" if ok is None else "PASS" if ok else "FAIL"
    ACCEPTANCE_LINES[number] = f"criterion {number:>2}: {status}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
