import pytest

from adaptnet.experiments.identities import (all_passed, check_kolmogorov_gap, check_xi_sum,
                                             check_xi_vs_a3b, run_identity_suite, xi_with_typo)


def test_default_suite_passes():
    results = run_identity_suite(draws=200, n_max=60, topologies=15, max_nodes=15)
    assert all_passed(results), [r for r in results if not r.passed]
    for r in results:
        assert r.max_deviation <= r.tolerance or r.tolerance == 0 and r.max_deviation == 0


def test_xi2_mutation_is_caught():
    assert not check_xi_sum(30, xi=xi_with_typo).passed
    assert not check_xi_vs_a3b(50, xi=xi_with_typo).passed
    results = run_identity_suite(draws=50, n_max=30, topologies=5, max_nodes=10, mutation="xi2")
    assert not all_passed(results)


def test_unknown_mutation():
    with pytest.raises((KeyError, ValueError)):
        run_identity_suite(draws=5, n_max=5, topologies=1, max_nodes=5, mutation="nope")


def test_kolmogorov_gap_is_the_dropped_term():
    assert check_kolmogorov_gap(200).passed
