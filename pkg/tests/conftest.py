import pytest

# one line per acceptance criterion (and per parameter set), printed at the end of the run
ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance():
    def record(number, name, passed, detail=""):
        line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {name}  {detail}".rstrip()
        ACCEPTANCE_LINES[(number, name)] = line
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
