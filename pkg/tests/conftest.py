import pytest

# (label, passed, detail) rows printed after the run by the acceptance suite
ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def record():
    def _record(label: str, passed: bool, detail: str) -> None:
        line = f"{'PASS' if passed else 'FAIL'} {label}: {detail}"
        print(line)
        ACCEPTANCE.append((label, passed, detail))

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} {label}: {detail}")
