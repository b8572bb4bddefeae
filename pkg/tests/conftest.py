import re

import numpy as np
import pytest

from ruinmoments.catalog import EXPONENTIAL_PROF, EXPONENTIAL_UNPROF, figure1_models, random_models

RANDOM_SEED = 20240611
N_RANDOM = 20

_criteria: dict[int, list[str]] = {}


@pytest.fixture(scope="session")
def fig1():
    return figure1_models()


@pytest.fixture(scope="session")
def random_set():
    return random_models(RANDOM_SEED, N_RANDOM)


@pytest.fixture(scope="session")
def exp_unprof():
    return EXPONENTIAL_UNPROF


@pytest.fixture(scope="session")
def exp_prof():
    return EXPONENTIAL_PROF


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    if report.when == "call" or report.outcome != "passed":
        _criteria.setdefault(int(m.group(1)), []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        ok = all(o == "passed" for o in _criteria[n])
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}")
