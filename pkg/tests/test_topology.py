import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adaptnet.topology import (Topology, TopologyError, complete_graph, grid_torus,
                               random_geometric, regular_circulant)


def test_circulant_degrees():
    assert set(regular_circulant(6, [1]).degrees) == {3}
    assert set(regular_circulant(100, [1, 2]).degrees) == {5}
    # antipodal offset contributes a single neighbor
    assert set(regular_circulant(100, [1, 50]).degrees) == {4}


def test_circulant_rejects_bad_offsets():
    with pytest.raises(TopologyError):
        regular_circulant(10, [6])
    with pytest.raises(TopologyError):
        regular_circulant(10, [2])  # disconnected
    with pytest.raises(TopologyError):
        regular_circulant(10, [])


def test_torus_shape():
    t = grid_torus(10, 10)
    assert t.node_count == 100 and t.is_regular and t.max_degree == 5
    assert grid_torus(3, 3).node_count == 9
    assert len(grid_torus(4, 5).edges) == 40
    with pytest.raises(TopologyError):
        grid_torus(2, 5)


def test_geometric_two_nodes_full_radius():
    t = random_geometric(2, math.sqrt(2), seed=0)
    assert t.edges == ((0, 1),)


def test_geometric_connected_and_reproducible():
    a = random_geometric(20, 0.4, seed=7)
    b = random_geometric(20, 0.4, seed=7)
    assert a.is_connected() and a.edges == b.edges


def test_geometric_zero_radius_rejected():
    with pytest.raises(TopologyError):
        random_geometric(20, 0.0, seed=1)


def test_neighborhood_includes_self():
    t = complete_graph(4)
    assert t.neighborhood(2) == (0, 1, 2, 3)
    assert 2 not in t.neighbors(2)
    assert t.degree(2) == 4


def test_rejects_self_loop_and_disconnected():
    with pytest.raises(TopologyError):
        Topology.from_edges(3, [(0, 0), (1, 2)])
    with pytest.raises(TopologyError):
        Topology.from_edges(4, [(0, 1), (2, 3)])


def test_edgelist_roundtrip(tmp_path):
    t = random_geometric(12, 0.5, seed=3)
    p = tmp_path / "g.txt"
    t.write_edgelist(p)
    assert Topology.read_edgelist(p).edges == t.edges


@settings(max_examples=40, deadline=None)
@given(st.integers(5, 40), st.floats(0.55, 1.0), st.integers(0, 10_000))
def test_handshake_and_symmetry(N, radius, seed):
    t = random_geometric(N, radius, seed)
    deg = t.degrees
    assert int(np.sum(deg - 1)) == 2 * len(t.edges)
    A = t.adjacency_matrix()
    assert np.array_equal(A, A.T)
    assert np.all(np.diag(t.adjacency_matrix(self_loops=True)) == 1)


def test_edgelist_errors_name_the_line(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("# header\n3\n0 1\n2 1\n")
    with pytest.raises(TopologyError, match=r"bad.txt:4:"):
        Topology.read_edgelist(p)
