import pytest

REPORT: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def report():
    """Record one verdict line per acceptance criterion."""

    def record(key: str, ok: bool, detail: str) -> None:
        REPORT[key] = (bool(ok), detail)
        print(f"{'PASS' if ok else 'FAIL'} {key}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(REPORT, key=lambda k: int(k.split()[1])):
        ok, detail = REPORT[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {key}: {detail}")
