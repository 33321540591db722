from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

_criteria: dict[str, list[bool]] = {}
_titles: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or report.failed:
        name = report.nodeid.split("::")[-1].split("[")[0]
        # test_criterion_<n>_<title>[__<part>]
        head = name.split("__")[0].split("_")
        number = head[2]
        _titles.setdefault(number, " ".join(head[3:]))
        _criteria.setdefault(number, []).append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria, key=int):
        ok = all(_criteria[number])
        terminalreporter.write_line(f"criterion {number} ({_titles[number]}): {'PASS' if ok else 'FAIL'}")
