import pytest

_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion.

    Usage: ``criterion("3", "detail text")``; the outcome is taken from the test.
    """
    noted = {}

    def note(number, detail=""):
        noted["number"], noted["detail"] = number, detail

    yield note
    if noted:
        rep = getattr(request.node, "rep_call", None)
        passed = rep is not None and rep.passed
        _RESULTS.append((noted["number"], passed, noted["detail"]))


@pytest.hookimpl(hookwrapper=True, tryfirst=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(_RESULTS, key=lambda r: int(r[0])):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}")
