import pytest

ACCEPTANCE_REPORT: dict = {}


@pytest.fixture
def report():
    """Record one verdict line per acceptance criterion."""

    def record(criterion: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE_REPORT[criterion] = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_REPORT, key=lambda k: int(k.split()[0][1:])):
        terminalreporter.write_line(ACCEPTANCE_REPORT[key])
