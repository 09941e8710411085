import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record():
    """Record one acceptance line and assert it."""
    def _record(cid: str, name: str, value: float, threshold: float, ok: bool | None = None,
                note: str = ""):
        ok = bool(value <= threshold) if ok is None else bool(ok)
        line = f"[{'PASS' if ok else 'FAIL'}] {cid:>3}  {name}: value={value:.3e} threshold={threshold:.1e}"
        if note:
            line += f"  ({note})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
