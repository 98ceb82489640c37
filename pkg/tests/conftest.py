import os
from collections import Counter

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from fringetrees.treecore import DegreeStatistic, PlaneTree, cycle_rotate

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

CHERRY = PlaneTree([2, 0, 0])
PATH3 = PlaneTree([1, 1, 0])


def stat_from_internal(internal):
    """Statistic whose non-leaf degrees are ``internal``; leaves fill the identity."""
    c = Counter(internal)
    c[0] = 1 + sum(d - 1 for d in internal)
    return DegreeStatistic(c)


@st.composite
def statistics(draw, max_internal=6, max_degree=4):
    internal = draw(st.lists(st.integers(1, max_degree), max_size=max_internal))
    return stat_from_internal(internal)


@st.composite
def trees(draw, max_internal=8, max_degree=4):
    bn = draw(statistics(max_internal, max_degree))
    perm = draw(st.permutations(bn.multiset().tolist()))
    return PlaneTree(cycle_rotate(perm))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES = {}


def record_criterion(number, ok, detail):
    """Store a one-line verdict for the acceptance summary."""
    ACCEPTANCE_LINES[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
