import pytest

# Filled in by the acceptance tests; reported once at the end of the run.
ACCEPTANCE_RESULTS = []


@pytest.fixture
def criterion():
    """Record one acceptance criterion verdict and enforce it."""

    def record(number: int, title: str, passed: bool, detail: str):
        ACCEPTANCE_RESULTS.append((number, title, passed, detail))
        assert passed, f"acceptance criterion {number} ({title}): {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number} [{status}] {title}: {detail}")
