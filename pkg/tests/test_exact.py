import numpy as np
import pytest

from adaptnet.evo.exact import MAX_NODES, absorption_probabilities, exact_fixation, flip_probabilities
from adaptnet.evo.payoff import UtilityMatrix2
from adaptnet.topology import complete_graph, random_geometric, regular_circulant


def moran(r, i, N):
    """Fixation of i mutants with constant relative fitness r in a well-mixed population."""
    return (1 - r ** -i) / (1 - r ** -N)


@pytest.mark.parametrize("i", [1, 3, 6])
def test_bd_complete_graph_is_moran(i):
    N, alpha = 8, 0.5
    # payoff depends only on one's own strategy, so fitness is constant per type
    U = UtilityMatrix2(1.0, 1.0, 3.0, 3.0)
    f_r = (1 - alpha) + alpha * (N - 1) * 1.0
    f_m = (1 - alpha) + alpha * (N - 1) * 3.0
    init = np.zeros(N, dtype=int)
    init[:i] = 1
    assert exact_fixation(complete_graph(N), U, alpha, init, "BD") == pytest.approx(
        moran(f_m / f_r, i, N), rel=1e-10)


@pytest.mark.parametrize("rule", ["IM", "BD", "DB"])
def test_neutral_regular_graph(rule):
    init = np.array([1, 1, 0, 1, 0, 0, 0])
    h = exact_fixation(regular_circulant(7, [1]), UtilityMatrix2(1, 2, 3, 4), 0.0, init, rule)
    assert h == pytest.approx(3 / 7, abs=1e-12)


def test_absorption_boundaries_and_range():
    h = absorption_probabilities(random_geometric(7, 0.6, 1), UtilityMatrix2(0.2, 0.7, 0.4, 1.0), 0.3)
    assert h[0] == 0.0 and h[-1] == 1.0
    assert np.all((h >= -1e-12) & (h <= 1 + 1e-12))


def test_flip_probabilities_are_sub_stochastic():
    P = flip_probabilities(complete_graph(6), UtilityMatrix2(0.2, 0.7, 0.4, 1.0), 0.3, "IM")
    assert np.all(P >= 0) and np.all(P.sum(axis=1) <= 1 + 1e-12)
    assert np.all(P[0] == 0) and np.all(P[-1] == 0)


def test_size_limit_and_rule():
    with pytest.raises(ValueError):
        flip_probabilities(regular_circulant(MAX_NODES + 2, [1]), UtilityMatrix2(1, 1, 1, 1), 0.1, "IM")
    with pytest.raises(ValueError):
        flip_probabilities(complete_graph(3), UtilityMatrix2(1, 1, 1, 1), 0.1, "XY")
