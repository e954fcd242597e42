import numpy as np
import pytest

from bearing_swarm.graph import FormationGraph


def random_connected_graph(rng, n=None, max_n=8):
    """Random spanning tree plus random extra edges, with 1..n random anchors."""
    if n is None:
        n = int(rng.integers(2, max_n + 1))
    order = rng.permutation(n) + 1
    edges = set()
    for k in range(1, n):
        a, b = int(order[k]), int(order[rng.integers(0, k)])
        edges.add((min(a, b), max(a, b)))
    for _ in range(int(rng.integers(0, n))):
        a, b = rng.choice(n, 2, replace=False) + 1
        edges.add((int(min(a, b)), int(max(a, b))))
    n_anchor = int(rng.integers(1, n + 1))
    anchors = tuple(int(a) for a in rng.choice(n, n_anchor, replace=False) + 1)
    return FormationGraph(n, sorted(edges), anchors)


def random_positions(rng, n, scale=5.0):
    # points in general position with overwhelming probability
    return rng.uniform(-scale, scale, size=(n, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
