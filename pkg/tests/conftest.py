import sys

import numpy as np
import pytest

from fqatest import CurveMatrix

# Oracle fixture F1: a 6 x 3 integer series with ties in every column.
F1 = [
    [3, 1, 4],
    [1, 5, 9],
    [2, 6, 5],
    [3, 5, 8],
    [9, 7, 9],
    [3, 2, 3],
]
F1_LEVELS = (1 / 3, 2 / 3)


@pytest.fixture
def f1():
    return CurveMatrix(np.array(F1, dtype=float))


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS):
            terminalreporter.write_line(line)
