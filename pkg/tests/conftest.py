from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("hyperstab", max_examples=60, deadline=None, derandomize=True)
settings.load_profile("hyperstab")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
