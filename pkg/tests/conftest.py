import numpy as np
import pytest
from hypothesis import settings, strategies as st

from sparsetrack.geometry import BBox

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

coord = st.floats(-500, 2500, allow_nan=False, allow_infinity=False)
size = st.floats(0, 400, allow_nan=False, allow_infinity=False)


@st.composite
def boxes(draw, min_size=0.0):
    x, y = draw(coord), draw(coord)
    w = draw(st.floats(min_size, 400, allow_nan=False))
    h = draw(st.floats(min_size, 400, allow_nan=False))
    return BBox(x, y, x + w, y + h)


@st.composite
def cost_matrices(draw, max_side=6):
    n = draw(st.integers(0, max_side))
    m = draw(st.integers(0, max_side))
    vals = draw(st.lists(st.floats(0, 1, allow_nan=False), min_size=n * m, max_size=n * m))
    return np.array(vals, dtype=float).reshape(n, m)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
