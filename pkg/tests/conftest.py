import pytest

# criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE: dict = {}


def _verdict(passed):
    return "SKIP" if passed is None else "PASS" if passed else "FAIL"


@pytest.fixture
def accept():
    def record(number, passed, detail=""):
        """``passed`` is True, False, or None for a skipped criterion."""
        ACCEPTANCE[number] = (passed, detail)
        line = f"criterion {number}: {_verdict(passed)} {detail}".rstrip()
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {_verdict(passed)} {detail}".rstrip())
