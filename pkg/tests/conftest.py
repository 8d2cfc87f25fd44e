import pytest

_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record a one-line pass/fail verdict for an acceptance criterion."""

    def log(criterion: str, ok: bool, detail: str) -> bool:
        _LINES.append(f"{criterion:<4} {'PASS' if ok else 'FAIL'}  {detail}")
        print(_LINES[-1])
        return ok

    return log


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
