import os
import sys

from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default",
    max_examples=100,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


_CRITERIA: list = []


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    labels = [v for k, v in report.user_properties if k == "criterion"]
    if not labels:
        return
    verdict = "PASS" if report.passed else "FAIL"
    note = " (expected, see decisions ledger)" if hasattr(report, "wasxfail") else ""
    _CRITERIA.append(f"{verdict}  {labels[0]}  [{report.duration:.2f} s]{note}")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for line in _CRITERIA:
        terminalreporter.write_line(line)
