import pytest

_ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line: call with ``(number, title, passed, detail)``."""
    def record(number, title, passed, detail=""):
        _ACCEPTANCE[number] = (title, bool(passed), detail)
        return passed
    return record


def pytest_runtest_makereport(item, call):
    # a criterion whose test errored before recording still gets a line
    number = getattr(item.function, "criterion_number", None)
    if number is not None and call.when == "call" and call.excinfo is not None and number not in _ACCEPTANCE:
        _ACCEPTANCE[number] = (item.name, False, f"raised {call.excinfo.typename}")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, passed, detail = _ACCEPTANCE[number]
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))
