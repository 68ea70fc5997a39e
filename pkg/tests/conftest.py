"""Prints one PASS/FAIL line per acceptance criterion at the end of the run."""

_results: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if not name.startswith("test_criterion_"):
        return
    if report.when == "call" or report.failed:
        prev = _results.get(name, ("PASS", ""))[0]
        outcome = "FAIL" if report.failed or prev == "FAIL" else "PASS"
        _results[name] = (outcome, report.nodeid)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_results):
        outcome, _ = _results[name]
        number = name.split("_")[2]
        label = " ".join(name.split("_")[3:])
        terminalreporter.write_line(f"criterion {int(number):2d} {outcome}  {label}")
