import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from brp.randgen import gaussian_matrix  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture
def gauss():
    """``gauss(rows, cols, seed)``: seeded standard normal matrix."""
    return gaussian_matrix


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
