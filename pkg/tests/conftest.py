import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("frackap", deadline=None, max_examples=40)
settings.load_profile("frackap")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# -- acceptance summary: one line per criterion -----------------------------------

_CRITERIA = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            num, title = mark.args
            _CRITERIA.setdefault(num, [title, []])
            item.user_properties.append(("criterion", num))


def pytest_runtest_logreport(report):
    num = dict(report.user_properties).get("criterion")
    if num is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _CRITERIA[num][1].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, outcomes = _CRITERIA[num]
        if not outcomes:
            status = "NOT RUN"
        elif all(o == "passed" for o in outcomes):
            status = "PASS"
        else:
            status = "FAIL"
        terminalreporter.write_line(f"criterion {num:2d} {status:7s} {title}")
