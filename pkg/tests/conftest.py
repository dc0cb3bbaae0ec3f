import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_line():
    """Record one PASS/FAIL line for the terminal summary."""

    def record(number: int, passed: bool, text: str, seconds: float) -> None:
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {text} ({seconds:.2f} s)"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda ln: int(ln.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
