# Prints one PASS/FAIL line per acceptance criterion after the run.
_outcomes = {}
_docs = {}


def pytest_collection_modifyitems(items):
    for item in items:
        if item.name.startswith("test_criterion_"):
            _docs[item.name] = (item.function.__doc__ or item.name).strip()


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if name in _docs and (report.when == "call" or report.failed):
        _outcomes[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_outcomes, key=lambda n: int(n.split("_")[2])):
        status = "PASS" if _outcomes[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {name.split('_')[2]}: {_docs[name]}")
