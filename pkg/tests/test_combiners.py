from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adaptnet.combiners import (RULES, CombinerRowError, combination_matrix, hastings, laplacian,
                                maximum_degree, metropolis, relative_degree, uniform, validate_row)
from adaptnet.topology import Topology, complete_graph, random_geometric, regular_circulant

from conftest import profiles_for

STATIC = ("uniform", "max_degree", "laplacian", "rel_degree", "rel_degree_var", "metropolis")


def test_max_degree_example():
    t = regular_circulant(20, [1, 10])  # every node has |N_i| = 4
    row = maximum_degree(t, 0)
    assert row[1] == pytest.approx(1 / 20)
    assert row[0] == pytest.approx(17 / 20)


def test_laplacian_example():
    t = Topology.from_edges(6, [(0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (1, 2)])
    row = laplacian(t, 1)
    assert t.max_degree == 6 and t.degree(1) == 3
    assert row[0] == pytest.approx(1 / 6) and row[1] == pytest.approx(2 / 3)


def test_relative_degree_example():
    t = Topology.from_edges(8, [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6), (2, 7)])
    row = relative_degree(t, 0)
    assert row[[0, 1, 2]] == pytest.approx([0.25, 1 / 3, 5 / 12], abs=1e-15)


def test_metropolis_example():
    t = Topology.from_edges(6, [(0, 1), (0, 2), (1, 3), (1, 4), (1, 5)])
    assert metropolis(t, 0)[1] == pytest.approx(1 / 5)


def test_hastings_example():
    t = Topology.from_edges(3, [(0, 1), (1, 2)])
    prof = profiles_for([0.5, 1.5, 0.5])
    row = hastings(t, prof, 1)
    assert row[0] == pytest.approx(1 / 9)
    assert row[1] == pytest.approx(7 / 9)


def test_hastings_can_go_negative():
    # a quiet hub surrounded by noisy leaves: the published form over-weights noise
    t = Topology.from_edges(4, [(0, 1), (0, 2), (0, 3)])
    with pytest.raises(CombinerRowError):
        combination_matrix("hastings", t, profiles_for([0.1, 1.5, 1.5, 1.5]))


def test_uniform_two_nodes_is_average():
    assert np.allclose(uniform(complete_graph(2), 0), [0.5, 0.5])


def test_unknown_rule():
    with pytest.raises(ValueError):
        combination_matrix("nope", complete_graph(3))


def test_validate_row_rejects():
    t = Topology.from_edges(3, [(0, 1), (1, 2)])
    with pytest.raises(CombinerRowError):
        validate_row(np.array([0.5, 0.0, 0.5]), t, 0)  # leaks to non-neighbor
    with pytest.raises(CombinerRowError):
        validate_row(np.array([0.7, 0.4, 0.0]), t, 0)
    with pytest.raises(CombinerRowError):
        validate_row(np.array([1.2, -0.2, 0.0]), t, 0)


def _oracle_row(rule, t, s2, i):
    """Exact rational reference for the static rules."""
    N = t.node_count
    deg = [t.degree(k) for k in range(N)]
    hood = t.neighborhood(i)
    row = [Fraction(0)] * N
    if rule == "uniform":
        for j in hood:
            row[j] = Fraction(1, deg[i])
    elif rule in ("max_degree", "laplacian", "metropolis"):
        for j in t.neighbors(i):
            if rule == "max_degree":
                row[j] = Fraction(1, N)
            elif rule == "laplacian":
                row[j] = Fraction(1, max(deg))
            else:
                row[j] = Fraction(1, max(deg[i], deg[j]))
        row[i] = 1 - sum(row)
    else:
        w = {j: Fraction(deg[j]) / (s2[j] if rule == "rel_degree_var" else 1) for j in hood}
        tot = sum(w.values())
        for j in hood:
            row[j] = w[j] / tot
    return np.array([float(x) for x in row])


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 25), st.integers(0, 10_000), st.sampled_from(STATIC))
def test_rules_match_rational_oracle(N, seed, rule):
    t = random_geometric(N, 0.6, seed)
    rng = np.random.default_rng(seed)
    s2 = [Fraction(int(k), 10) for k in rng.integers(2, 16, N)]
    A = combination_matrix(rule, t, profiles_for([float(x) for x in s2]))
    for i in range(N):
        assert np.allclose(A[i], _oracle_row(rule, t, s2, i), atol=1e-14, rtol=0)
    assert np.allclose(A.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(A >= 0) and np.all(A[~t.support] == 0)


@settings(max_examples=20, deadline=None)
@given(st.integers(3, 25), st.integers(0, 10_000), st.booleans())
def test_metropolis_symmetric(N, seed, inclusive):
    A = combination_matrix("metropolis", random_geometric(N, 0.6, seed), inclusive=inclusive)
    assert np.allclose(A, A.T, atol=1e-15)


def test_hastings_homogeneous_equals_metropolis():
    t = random_geometric(15, 0.5, 4)
    a = combination_matrix("hastings", t, profiles_for([0.8] * 15))
    b = combination_matrix("metropolis", t)
    assert np.allclose(a, b, atol=1e-15)


def test_registry_names():
    assert set(RULES) == set(STATIC) | {"hastings"}
