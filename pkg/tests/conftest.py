import pytest

ACCEPTANCE = {}  # criterion number -> (name, passed, detail)
N_CRITERIA = 11


@pytest.fixture
def criterion():
    """Record one acceptance criterion's verdict and fail the test if it did not pass."""

    def record(number, name, passed, detail=""):
        ACCEPTANCE[number] = (name, bool(passed), detail)
        assert passed, f"criterion {number} ({name}) failed: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, N_CRITERIA + 1):
        name, ok, detail = ACCEPTANCE.get(n, ("not evaluated", False, "test did not reach its verdict"))
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n:2d}. {name}: {detail}")
