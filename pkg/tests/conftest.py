import sys

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_config_positions(rng, n, box=2.0, min_sep=0.1):
    from vortexdyn.core import dmin_array

    while True:
        x = rng.uniform(-box, box, size=(n, 2))
        if dmin_array(x) >= min_sep:
            return x


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
