import pytest

VERDICTS = {}


@pytest.fixture
def verdict():
    """Record a one-line pass/fail result for an acceptance criterion."""
    def record(number, ok, detail):
        VERDICTS[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(VERDICTS[number])
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[number])
