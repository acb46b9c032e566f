import os

import pytest

from plane15 import matrix, symmetry


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "slow: long-running test (full pipeline stages, big corpora)"
    )


def pytest_collection_modifyitems(config, items):
    if os.environ.get("PLANE15_RUN_SLOW") or config.getoption("-m", default=""):
        return
    skip = pytest.mark.skip(
        reason="slow; set PLANE15_RUN_SLOW=1 or select with -m slow"
    )
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def fixture_matrix():
    return matrix.default_fixture()


@pytest.fixture(scope="session")
def group(fixture_matrix):
    return symmetry.automorphisms(fixture_matrix)


@pytest.fixture(scope="session")
def stab(group):
    return symmetry.stabilizer(group, 1)


@pytest.fixture(scope="session")
def sample_completion(fixture_matrix):
    path = os.path.join(os.path.dirname(__file__), "data", "completion_sample.txt")
    with open(path) as f:
        lines = f.read().splitlines()
    cells = [
        (i, j)
        for idx, line in enumerate(lines)
        for i in (22 + idx,)
        for j in range(16, 76)
        if line[j - 1] == "1" and fixture_matrix.char(i, j) == "."
    ]
    return symmetry.Completion.from_cells(cells)


@pytest.fixture(scope="session")
def witness45_text():
    path = os.path.join(os.path.dirname(__file__), "data", "witness45_rows.txt")
    with open(path) as f:
        return f.read()
