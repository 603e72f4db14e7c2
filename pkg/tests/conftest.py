import pytest

_CRITERIA = []


@pytest.fixture
def record_criterion():
    """Log an acceptance criterion outcome; the summary prints one line per criterion."""

    def record(number, ok, detail):
        _CRITERIA.append((number, bool(ok), detail))
        print(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, ok, detail in sorted(_CRITERIA, key=lambda c: c[0]):
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
