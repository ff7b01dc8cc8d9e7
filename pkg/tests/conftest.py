import numpy as np
import pytest

from latticeperfect.coloring import ColoringMatrix, MergerMap

# four-color 2x2-periodic square coloring used throughout the application tests
APP_ROWS = [[0, 2, 2, 0], [2, 0, 0, 2], [2, 0, 0, 2], [0, 2, 2, 0]]


@pytest.fixture
def app_matrix():
    return ColoringMatrix.of(APP_ROWS, 4)


def named_merger(*names):
    """black=1, white=2, gray=3."""
    code = {"black": 1, "white": 2, "gray": 3}
    return MergerMap(tuple(code[n] for n in names))


PHI = {
    1: named_merger("black", "white", "gray", "black"),
    2: named_merger("black", "white", "gray", "white"),
    3: named_merger("black", "black", "black", "white"),
    4: named_merger("black", "black", "white", "white"),
    5: named_merger("black", "white", "white", "black"),
    6: MergerMap((1, 1, 1, 1)),
}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
