import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adaptnet.adaptation import NetworkState, combine, global_lms_step, lms_adapt, network_step
from adaptnet.combiners import CombinerRowError, combination_matrix
from adaptnet.policies import resolve_policy
from adaptnet.signal_model import SignalSource, make_true_parameter
from adaptnet.topology import complete_graph, random_geometric

from conftest import profiles_for


def test_lms_single_step():
    e1 = np.eye(5)[0]
    w = lms_adapt(np.zeros(5), e1, 1.0, 0.01)
    assert np.allclose(w, [0.01, 0, 0, 0, 0])


def test_midpoint_combine():
    assert np.allclose(combine(np.array([[0.0, 2.0], [2.0, 0.0]]), [0.5, 0.5]), [1.0, 1.0])


def test_combine_rejects_non_convex():
    with pytest.raises(CombinerRowError):
        combine(np.eye(2), [1.2, -0.2])


def test_uniform_on_pair_averages():
    t = complete_graph(2)
    prof = profiles_for([1.0, 1.0], mu=0.0)
    st0 = NetworkState(np.array([[0.0, 4.0], [2.0, 0.0]]), np.ones(2))
    pol = resolve_policy("uniform", t, prof)
    u = np.zeros((2, 2))
    out = network_step(st0, t, prof, pol, (u, np.zeros(2)))
    assert np.allclose(out.estimates, [[1.0, 2.0], [1.0, 2.0]])
    assert out.time == 1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_combined_estimate_in_convex_hull(seed):
    rng = np.random.default_rng(seed)
    t = random_geometric(10, 0.6, seed)
    prof = profiles_for(rng.uniform(0.2, 1.5, 10), mu=0.0)
    w = rng.normal(size=(10, 3))
    st0 = NetworkState(w, np.ones(10))
    out = network_step(st0, t, prof, resolve_policy("metropolis", t, prof),
                       (np.zeros((10, 3)), np.zeros(10)))
    for i in range(10):
        hood = list(t.neighborhood(i))
        assert np.all(out.estimates[i] <= w[hood].max(axis=0) + 1e-12)
        assert np.all(out.estimates[i] >= w[hood].min(axis=0) - 1e-12)


def test_noiseless_fixed_point():
    t = random_geometric(8, 0.6, 2)
    prof = profiles_for([0.0] * 8, spectrum=(2.0,) * 5)
    w0 = make_true_parameter(5)
    st0 = NetworkState.initial(8, 5, w_init=w0)
    u, d = SignalSource(prof, w0, seed=1).draw()
    for name in ("uniform", "rel_degree", "error_aware_pow"):
        out = network_step(st0, t, prof, resolve_policy(name, t, prof), (u, d))
        assert np.allclose(out.estimates, w0, atol=1e-14)


def test_full_graph_uniform_matches_centralized_average():
    # uniform mixing on a complete graph after one step equals the mean of local updates
    t = complete_graph(4)
    prof = profiles_for([0.5] * 4, mu=0.01, spectrum=(2.0,) * 3)
    w0 = make_true_parameter(3)
    u, d = SignalSource(prof, w0, seed=8).draw()
    out = network_step(NetworkState.initial(4, 3), t, prof, resolve_policy("uniform", t, prof), (u, d))
    ref = global_lms_step(np.zeros(3), u, d, 0.01 / 4)
    assert np.allclose(out.estimates, ref)


def test_random_mixing_copies_a_neighbor():
    t = random_geometric(10, 0.5, 3)
    prof = profiles_for([1.0] * 10, mu=0.0)
    w = np.arange(10.0)[:, None] * np.ones((10, 2))
    out = network_step(NetworkState(w, np.ones(10)), t, prof, resolve_policy("uniform", t, prof),
                       (np.zeros((10, 2)), np.zeros(10)), mixing="random",
                       rng=np.random.default_rng(0))
    for i in range(10):
        assert int(out.estimates[i, 0]) in t.neighborhood(i)


def test_bad_mixing_mode():
    t = complete_graph(2)
    prof = profiles_for([1.0, 1.0])
    with pytest.raises(ValueError):
        network_step(NetworkState.initial(2, 5), t, prof, resolve_policy("uniform", t, prof),
                     (np.zeros((2, 5)), np.zeros(2)), mixing="gossip")


def test_batched_step_matches_single_runs():
    t = random_geometric(6, 0.6, 1)
    prof = profiles_for(np.linspace(0.2, 1.5, 6))
    pol = resolve_policy("error_aware_exp", t, prof)
    w0 = make_true_parameter(5)
    u, d = SignalSource(prof, w0, seed=4, runs=3).draw()
    batch = network_step(NetworkState.initial(6, 5, runs=3), t, prof, pol, (u, d))
    for r in range(3):
        one = network_step(NetworkState.initial(6, 5), t, prof, pol, (u[r], d[r]))
        assert np.allclose(batch.estimates[r], one.estimates)
        assert np.allclose(batch.mse_estimates[r], one.mse_estimates)
