import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report():
    def record(criterion, passed, detail=""):
        line = f"[criterion {criterion}] {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
