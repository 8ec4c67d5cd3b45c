import os

import numpy as np
import pytest
from hypothesis import settings

from linematch import PointSet, make_power_cost

settings.register_profile("default", max_examples=60, deadline=None)
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# criterion number -> (ok, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(num: int, ok: bool, detail: str):
    ACCEPTANCE[num] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def sqrt_cost():
    return make_power_cost(0.5)


@pytest.fixture
def four_split():
    """Two close inner points flanked by far outer ones: the covering arc wins."""
    return PointSet([0.0, 4.9, 5.1, 10.0])


@pytest.fixture
def four_even():
    return PointSet([0.0, 1.0, 2.0, 3.0])


def random_points(rng: np.random.Generator, size: int, span: float = 10.0) -> PointSet:
    while True:
        xs = np.sort(rng.uniform(0.0, span, size))
        if np.all(np.diff(xs) > 0):
            return PointSet(xs)
