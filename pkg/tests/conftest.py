import pytest

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def acceptance_report():
    """Record one summary line per acceptance criterion."""

    def record(criterion: int, checks):
        hard = [c for c in checks if not c.informational]
        failed = [c for c in hard if not c.passed]
        status = "PASS" if not failed else "FAIL"
        line = f"criterion {criterion}: {status} ({len(hard) - len(failed)}/{len(hard)} checks)"
        if failed:
            line += " failing: " + "; ".join(c.name for c in failed)
        ACCEPTANCE_LINES[criterion] = line
        print(line)
        for c in checks:
            print("  " + c.line())
        return failed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
