import pytest

# criterion number -> (label, node ids, outcomes)
_ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Tag the running test as evidence for an acceptance criterion."""
    def register(number, label):
        entry = _ACCEPTANCE.setdefault(number, (label, set(), []))
        entry[1].add(request.node.nodeid)
    return register


def pytest_runtest_logreport(report):
    for _, nodes, outcomes in _ACCEPTANCE.values():
        if report.nodeid in nodes and (report.when == "call" or report.failed):
            outcomes.append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        label, _, outcomes = _ACCEPTANCE[number]
        ok = bool(outcomes) and all(outcomes)
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {number:>2}  {label}")
