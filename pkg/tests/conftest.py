import math

import numpy as np
import pytest

from hadflow import catalog
from hadflow.exact import to_phase_vector

_criteria: dict[int, dict] = {}


@pytest.fixture
def f4_point():
    """Core phases of the 4x4 family member at a = pi/2."""
    return to_phase_vector(catalog.get("F4_1").matrix, {"a": math.pi / 2})


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, title = mark.args
            _criteria.setdefault(number, {"title": title, "outcomes": []})


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number = mark.args[0]
    if report.when == "call" or (report.when == "setup" and not report.passed):
        ok = report.passed and not hasattr(report, "wasxfail")
        detail = "; ".join(v for k, v in item.user_properties if k == "detail")
        _criteria[number]["outcomes"].append((item.name, ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        outcomes = entry["outcomes"]
        if not outcomes:
            status = "NOT RUN"
        else:
            status = "PASS" if all(ok for _, ok, _ in outcomes) else "FAIL"
        details = "; ".join(d for _, _, d in outcomes if d)
        line = f"criterion {number:>2} {status:<7} {entry['title']}"
        if details:
            line += f"  [{details}]"
        terminalreporter.write_line(line)
