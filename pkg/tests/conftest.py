"""Shared random instance builders for the test suite."""
import numpy as np
import pytest

from sobolev_ricci import build_graph


def random_tree_edges(rng, n, low=0.1, high=10.0):
    """Random recursive tree: node i attaches to a uniform earlier node."""
    edges = []
    for i in range(1, n):
        j = int(rng.integers(0, i))
        edges.append((j, i, float(rng.uniform(low, high))))
    return edges


def random_tree(rng, n, low=0.1, high=10.0):
    return build_graph(random_tree_edges(rng, n, low, high), n)


def random_connected_graph(rng, n, extra=None, low=0.1, high=10.0, unit=False):
    """A random tree plus ``extra`` random chords; unit lengths when ``unit``."""
    edges = {(min(a, b), max(a, b)): w for a, b, w in random_tree_edges(rng, n, low, high)}
    extra = n if extra is None else extra
    tries = 0
    while extra > 0 and tries < 20 * n:
        tries += 1
        a, b = (int(x) for x in rng.integers(0, n, 2))
        if a == b or (min(a, b), max(a, b)) in edges:
            continue
        edges[(min(a, b), max(a, b))] = float(rng.uniform(low, high))
        extra -= 1
    return build_graph([(a, b, 1.0 if unit else w) for (a, b), w in edges.items()], n)


def random_measure_dense(rng, n, size):
    """Random probability vector on ``size`` distinct nodes of ``0..n-1``."""
    support = rng.choice(n, size=size, replace=False)
    mass = rng.random(size) + 0.05
    out = np.zeros(n)
    out[support] = mass / mass.sum()
    return out


@pytest.fixture
def path_abc():
    """Unit path a-b-c with a, b, c = 0, 1, 2."""
    return build_graph([(0, 1, 1.0), (1, 2, 1.0)])


@pytest.fixture
def cycle4():
    return build_graph([(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)])


@pytest.fixture
def triangle():
    return build_graph([(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
