import pytest

_LINES = []


@pytest.fixture
def report(capsys):
    """Record one PASS/FAIL line for the end-of-run summary and echo it immediately."""

    def emit(tag: str, ok: bool, detail: str, seconds: float):
        line = f"[{'PASS' if ok else 'FAIL'}] {tag}: {detail} ({seconds:.2f} s)"
        _LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
