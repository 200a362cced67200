import pytest

_BLOCKS: dict[int, list[str]] = {}


@pytest.fixture
def report():
    """Records one PASS/FAIL line per acceptance criterion, plus failing checks."""

    def emit(criterion: int, records, title: str) -> bool:
        ok = all(r.passed for r in records)
        lines = [f"{'PASS' if ok else 'FAIL'} criterion {criterion:2d}: {title} ({len(records)} checks)"]
        lines += ["    " + r.line() for r in records if not r.passed]
        _BLOCKS[criterion] = lines
        print("\n".join(lines))
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if _BLOCKS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(_BLOCKS):
            for line in _BLOCKS[key]:
                terminalreporter.write_line(line)
