import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SEED = 20240601

_criteria: dict[int, list[str]] = {}
_CRITERIA_TITLES = {
    1: "two-outcome state asymmetry",
    2: "continuous-signal example",
    3: "non-monotone dominance vector",
    4: "three-outcome pair minimal n",
    5: "non-generic counterexample",
    6: "perfected-LLR vs MPS equivalence",
    7: "sample-size bound n0 <= 64",
    8: "large-deviation sandwich",
    9: "catalyst",
    10: "divergence functional",
    11: "majorization",
    12: "multi-state conditions",
}


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k): acceptance criterion number k")


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    report = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None and (report.when == "call" or report.failed or report.skipped):
        _criteria.setdefault(marker.args[0], []).append(report.outcome)
    return report


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA_TITLES):
        outcomes = _criteria.get(k)
        if outcomes is None:
            status = "NOT RUN"
        else:
            status = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"criterion {k:2d} {status:7s} {_CRITERIA_TITLES[k]}")
