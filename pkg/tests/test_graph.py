import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bearing_swarm.errors import InvalidGraph
from bearing_swarm.graph import FormationGraph, default_topology, incidence_matrix, is_connected, neighbors

from conftest import random_connected_graph


def path3():
    return FormationGraph(3, [(1, 2), (2, 3)], [1])


def test_neighbors_path():
    assert neighbors(path3(), 2) == [1, 3]


def test_neighbors_single_edge():
    assert neighbors(FormationGraph(2, [(1, 2)], [1]), 1) == [2]


def test_default_topology_has_edge_2_4():
    g = default_topology()
    assert 4 in g.neighbors(2)
    assert g.anchors == (1, 7)
    assert is_connected(g)


def test_neighbors_out_of_range():
    with pytest.raises(IndexError):
        neighbors(path3(), 4)
    with pytest.raises(IndexError):
        neighbors(path3(), 0)


def test_incidence_single_edge():
    H = incidence_matrix(FormationGraph(2, [(1, 2)], [1]))
    np.testing.assert_array_equal(H, [[-1.0, 1.0]])


def test_incidence_triangle_kills_ones():
    H = incidence_matrix(FormationGraph(3, [(1, 2), (1, 3), (2, 3)], [1]))
    np.testing.assert_array_equal(H @ np.ones(3), np.zeros(3))


def test_incidence_rank_path():
    assert np.linalg.matrix_rank(incidence_matrix(path3())) == 2


def test_edges_normalized_to_tail_smaller():
    g = FormationGraph(3, [(2, 1), (3, 2)], [1])
    assert g.edges == ((1, 2), (2, 3))


def test_is_connected_false_for_two_components():
    g = FormationGraph(4, [(1, 2), (3, 4)], [1], require_connected=False)
    assert not is_connected(g)
    with pytest.raises(InvalidGraph):
        FormationGraph(4, [(1, 2), (3, 4)], [1])


@pytest.mark.parametrize("edges, anchors", [
    ([(1, 1)], [1]),            # self-loop
    ([(1, 2), (2, 1)], [1]),    # duplicate
    ([(1, 2)], []),             # no anchors
    ([(1, 3)], [1]),            # vertex out of range
    ([(1, 2)], [5]),            # anchor out of range
])
def test_invalid_graphs(edges, anchors):
    with pytest.raises(InvalidGraph):
        FormationGraph(2, edges, anchors)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_connected_graph_incidence_properties(seed):
    g = random_connected_graph(np.random.default_rng(seed))
    H = incidence_matrix(g)
    assert np.linalg.matrix_rank(H) == g.n - 1
    assert np.linalg.norm(H @ np.ones(g.n)) <= 1e-12
    for k, (i, j) in enumerate(g.edges):
        assert H[k, j - 1] == 1 and H[k, i - 1] == -1 and np.count_nonzero(H[k]) == 2


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_neighbors_symmetric(seed):
    g = random_connected_graph(np.random.default_rng(seed))
    for i in range(1, g.n + 1):
        for j in g.neighbors(i):
            assert i in g.neighbors(j)
