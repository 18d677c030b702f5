import pytest

# acceptance lines collected during the run, echoed in the terminal summary
_ACCEPTANCE_LINES = []


@pytest.fixture
def report_line():
    def emit(line):
        print(line)
        _ACCEPTANCE_LINES.append(line)
    return emit


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
