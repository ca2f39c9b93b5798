from hypothesis import HealthCheck, settings

# Derandomized: every run uses the same default seed, so property results are reproducible.
settings.register_profile(
    "solv",
    derandomize=True,
    deadline=None,
    database=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("solv")

# -- acceptance summary -----------------------------------------------------------------

import pytest

_CRITERIA: dict[int, bool] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n = mark.args[0]
    if report.when == "call" or (report.when == "setup" and report.failed):
        _CRITERIA[n] = _CRITERIA.get(n, True) and report.passed


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        terminalreporter.write_line(f"criterion {n}: {'PASS' if _CRITERIA[n] else 'FAIL'}")
