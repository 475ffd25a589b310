import pytest

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record a one-line verdict for an acceptance criterion, then assert it."""

    def record(number: int, title: str, ok: bool, detail: str = ""):
        ACCEPTANCE_LINES[number] = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}" + (
            f"  ({detail})" if detail else "")
        assert ok, ACCEPTANCE_LINES[number]

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
