import pytest

_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES] = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    lines = request.config.stash[_LINES]

    def record(number, title, ok, detail="", part=""):
        tag = f"{number:>2}{part}"
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {tag:<3}: {title}"
        if detail:
            line += f" | {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: s.split("criterion")[1]):
            terminalreporter.write_line(line)
