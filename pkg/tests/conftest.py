import pytest

_verdicts: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def verdict():
    """Record one pass/fail line for an acceptance criterion."""

    def record(cid: str, passed: bool, detail: str) -> bool:
        _verdicts[cid] = (passed, detail)
        print(f"{cid} {'PASS' if passed else 'FAIL'}  {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_verdicts):
        passed, detail = _verdicts[cid]
        terminalreporter.write_line(f"{cid:<12} {'PASS' if passed else 'FAIL'}  {detail}")
