"""Algebraic identities behind the theory, checked numerically.

Each check returns an :class:`IdentityResult` with the largest deviation it
saw and the tolerance it was held to.  The xi checks accept alternative
coefficients so that a deliberately broken formula can be shown to fail.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..combiners import CombinerRowError, combination_matrix
from ..egt_combiners import TABLE2_RULES, strong_selection_row, table2_row
from ..evo import theory
from ..evo.payoff import UtilityMatrix2, pi_emse, step_size_bound, utility_from_pi
from ..signal_model import NodeProfile
from ..topology import Topology

XiFn = Callable[[int], tuple[float, float, float, float]]


@dataclass(frozen=True)
class IdentityResult:
    name: str
    passed: bool
    max_deviation: float
    tolerance: float
    cases: int
    seconds: float
    detail: str = ""


def xi_with_typo(n: int) -> tuple[float, float, float, float]:
    """xi coefficients with the sign of the constant in xi2 flipped."""
    x1, x2, x3, x4 = theory.xi_coeffs(n)
    return x1, x2 + 6, x3, x4


MUTATIONS: dict[str, XiFn] = {"xi2": xi_with_typo}


def _timed(name: str, tol: float, fn) -> IdentityResult:
    t0 = time.perf_counter()
    dev, cases, detail = fn()
    return IdentityResult(name, bool(dev <= tol), float(dev), tol, cases,
                          time.perf_counter() - t0, detail)


def _xi_form(n: int, N: int, alpha: float, U: np.ndarray, xi: XiFn) -> float:
    return 1.0 / (n + 1) + alpha * n * N / (6.0 * (n + 1) ** 3) * float(np.dot(xi(n), U))


def check_xi_sum(n_max: int = 200, xi: XiFn = theory.xi_coeffs) -> IdentityResult:
    def run():
        sums = [abs(sum(xi(n))) for n in range(3, n_max + 1)]
        return max(sums), len(sums), f"n in 3..{n_max}"
    return _timed("xi_sum_zero", 0.0, run)


def check_xi_vs_a3b(draws: int = 1000, seed: int = 0, n_range: tuple[int, int] = (3, 12),
                    xi: XiFn = theory.xi_coeffs) -> IdentityResult:
    """Closed form with xi against 1/(n+1) + alpha n N/(6(n+1)^3)(a+3b)."""
    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(draws):
            n = int(rng.integers(n_range[0], n_range[1] + 1))
            N = int(rng.integers(n + 1, 1001))
            alpha = float(rng.uniform(0.0, 0.05))
            U = rng.uniform(0.0, 1.0, 4)
            a, b = theory.appendix_coeffs(n, UtilityMatrix2(*U))
            ref = 1.0 / (n + 1) + alpha * n * N / (6.0 * (n + 1) ** 3) * (a + 3 * b)
            got = _xi_form(n, N, alpha, U, xi)
            worst = max(worst, abs(got - ref) / abs(ref))
        return worst, draws, f"n in {n_range[0]}..{n_range[1]}, relative error"
    return _timed("xi_matches_a_plus_3b", 1e-12, run)


def check_xi_coefficientwise(n_max: int = 200, xi: XiFn = theory.xi_coeffs) -> IdentityResult:
    """xi_k equals the u_k coefficient of a + 3b, for every k and n."""
    def run():
        worst = 0.0
        for n in range(3, n_max + 1):
            for k in range(4):
                e = np.zeros(4)
                e[k] = 1.0
                a, b = theory.appendix_coeffs(n, UtilityMatrix2(*e))
                worst = max(worst, abs(xi(n)[k] - (a + 3 * b)))
        return worst, 4 * (n_max - 2), f"n in 3..{n_max}"
    return _timed("xi_coefficientwise", 0.0, run)


def random_connected_topology(rng: np.random.Generator, max_nodes: int = 30) -> Topology:
    """Random spanning tree plus a random number of extra edges."""
    N = int(rng.integers(2, max_nodes + 1))
    order = rng.permutation(N)
    edges = {tuple(sorted((int(order[k]), int(order[rng.integers(k)])))) for k in range(1, N)}
    extra = int(rng.integers(0, N * (N - 1) // 2 - (N - 1) + 1))
    for _ in range(extra):
        i, j = rng.choice(N, size=2, replace=False)
        edges.add((int(min(i, j)), int(max(i, j))))
    return Topology.from_edges(N, edges, name=f"random_N{N}")


def random_profiles(rng: np.random.Generator, N: int, M: int = 2) -> list[NodeProfile]:
    return [NodeProfile(float(rng.uniform(0.1, 2.0)), 0.01, (1.0,) * M) for _ in range(N)]


def check_table2_reproduces_table1(topologies: int = 100, max_nodes: int = 30,
                                   seed: int = 0) -> IdentityResult:
    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(topologies):
            topo = random_connected_topology(rng, max_nodes)
            prof = random_profiles(rng, topo.node_count)
            for rule in TABLE2_RULES:
                A = combination_matrix(rule, topo, prof)
                B = np.vstack([table2_row("im", rule, topo, prof, i) for i in range(topo.node_count)])
                worst = max(worst, float(np.abs(A - B).max()))
        return worst, topologies * len(TABLE2_RULES), f"rules {', '.join(TABLE2_RULES)}"
    return _timed("table2_reproduces_table1", 1e-12, run)


def check_strong_selection_rows(topologies: int = 30, max_nodes: int = 20,
                                seed: int = 1) -> IdentityResult:
    """Metropolis and Hastings rows from pairwise utilities at selection intensity 1."""
    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        checked = skipped = 0
        for _ in range(topologies):
            topo = random_connected_topology(rng, max_nodes)
            prof = random_profiles(rng, topo.node_count)
            for rule in ("metropolis", "hastings"):
                try:
                    A = combination_matrix(rule, topo, prof)
                except CombinerRowError:
                    # the printed Hastings row can go negative; such instances are rejected upstream
                    skipped += 1
                    continue
                B = np.vstack([strong_selection_row(rule, topo, prof, i)
                               for i in range(topo.node_count)])
                worst = max(worst, float(np.abs(A - B).max()))
                checked += 1
        return worst, checked, f"metropolis, hastings; {skipped} invalid Hastings instances skipped"
    return _timed("strong_selection_reproduces_table1", 1e-12, run)


def check_pi_specializations(draws: int = 500, seed: int = 2) -> IdentityResult:
    """General pi(x, y) against its four closed forms for the strategy pairs."""
    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(draws):
            sr2, sm2 = rng.uniform(0.05, 3.0, 2)
            mu, tr, z2 = rng.uniform(1e-4, 0.1), rng.uniform(1, 20), rng.uniform(1, 50)
            c1, c2 = mu * tr / 4, mu * mu * z2 / 2
            h = 2 * sm2 * sr2 / (sm2 + sr2)
            sr, sm = np.sqrt(sr2), np.sqrt(sm2)
            pairs = [((sr, sr), c1 * sr2 + 2 * c2), ((sr, sm), c1 * h + 2 * c2 * sr2 / sm2),
                     ((sm, sr), c1 * h + 2 * c2 * sm2 / sr2), ((sm, sm), c1 * sm2 + 2 * c2)]
            for (x, y), ref in pairs:
                worst = max(worst, abs(pi_emse(x, y, mu, tr, z2) - ref) / ref)
        return worst, 4 * draws, "relative error"
    return _timed("pi_specializations", 1e-12, run)


def check_step_size_boundary(draws: int = 500, seed: int = 3) -> IdentityResult:
    """At the step-size bound u1 = u3 and u2 = u4 exactly, while u3 < u2 stays strict."""
    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        bad = 0
        for _ in range(draws):
            sr2 = rng.uniform(0.5, 3.0)
            tau = rng.uniform(0.05, 0.95)
            tr, z2 = rng.uniform(1, 20), rng.uniform(1, 50)
            mu = step_size_bound(tau, tr, sr2, z2)
            sr, sm = np.sqrt(sr2), np.sqrt(tau * sr2)
            u1 = 1 / pi_emse(sr, sr, mu, tr, z2)
            u3 = 1 / pi_emse(sr, sm, mu, tr, z2)
            u2 = 1 / pi_emse(sm, sr, mu, tr, z2)
            u4 = 1 / pi_emse(sm, sm, mu, tr, z2)
            worst = max(worst, abs(u1 - u3) / u1, abs(u2 - u4) / u4)
            bad += not u3 < u2
        return (worst if bad == 0 else np.inf), draws, f"relative error; {bad} draws broke u3<u2"
    return _timed("step_size_boundary", 1e-12, run)


def _ordered_utilities(rng: np.random.Generator) -> UtilityMatrix2:
    sr2 = rng.uniform(0.5, 3.0)
    tau = rng.uniform(0.05, 0.95)
    tr, z2 = rng.uniform(1, 20), rng.uniform(1, 50)
    mu = step_size_bound(tau, tr, sr2, z2) * rng.uniform(0.05, 0.95)
    return utility_from_pi(sr2, tau * sr2, mu, tr, z2)


def check_u_prime_negative(draws: int = 300, seed: int = 4) -> IdentityResult:
    """u' < 0 for every rule whenever u1 < u3 < u2 < u4; reports max u'/u4."""
    def run():
        rng = np.random.default_rng(seed)
        worst = -np.inf
        for _ in range(draws):
            U = _ordered_utilities(rng)
            if not U.ordered:
                return np.inf, draws, "generated utilities lost their ordering"
            for n in range(3, 13):
                for rule in ("IM", "BD", "DB"):
                    worst = max(worst, theory.u_prime(U, n, rule) / U.u4)
        return worst, draws * 30, "max u'/u4 over n in 3..12 and IM, BD, DB"
    res = _timed("u_prime_negative", 0.0, run)
    # the deviation here is the largest u' itself, which must be strictly negative
    return IdentityResult(res.name, res.max_deviation < 0, res.max_deviation, res.tolerance,
                          res.cases, res.seconds, res.detail)


def check_kolmogorov_gap(draws: int = 500, seed: int = 5) -> IdentityResult:
    """H(1/(n+1)) exceeds the closed form by exactly alpha n N a / (6 (n+1)^4)."""
    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(draws):
            n = int(rng.integers(3, 13))
            N = int(rng.integers(n + 1, 1001))
            alpha = float(rng.uniform(0, 0.05))
            U = UtilityMatrix2(*rng.uniform(0, 1, 4))
            a, _ = theory.appendix_coeffs(n, U)
            gap = (theory.fixation_kolmogorov(n, N, alpha, U, 1 / (n + 1))
                   - theory.theorem1_closed_form(n, N, alpha, U))
            worst = max(worst, abs(gap - alpha * n * N * a / (6 * (n + 1) ** 4)))
        return worst, draws, "absolute error"
    return _timed("kolmogorov_minus_closed_form", 1e-12, run)


def check_slow_manifold(draws: int = 500, seed: int = 6) -> IdentityResult:
    """On the slow manifold dq_mm/dt = 0, and dp_m/dt = 0 for equal utilities."""
    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(draws):
            n = int(rng.integers(3, 13))
            p = float(rng.uniform(0.01, 0.99))
            q_mm = theory.slow_manifold_conditionals(p, n)[0]
            c = float(rng.uniform(0.1, 2.0))
            dp, dq = theory.pair_dynamics_rhs(p, q_mm, n, 100, UtilityMatrix2(c, c, c, c), 0.01)
            worst = max(worst, abs(dp), abs(dq))
        return worst, draws, "absolute derivative"
    return _timed("slow_manifold_stationary", 1e-12, run)


def run_identity_suite(*, draws: int = 1000, n_max: int = 200, topologies: int = 100,
                       max_nodes: int = 30, seed: int = 0,
                       mutation: str | None = None) -> list[IdentityResult]:
    """Run every identity; ``mutation`` names a deliberate defect from MUTATIONS."""
    xi = theory.xi_coeffs if mutation is None else MUTATIONS[mutation]
    return [
        check_xi_sum(n_max, xi),
        check_xi_vs_a3b(draws, seed, xi=xi),
        check_xi_coefficientwise(n_max, xi),
        check_table2_reproduces_table1(topologies, max_nodes, seed),
        check_strong_selection_rows(seed=seed + 1),
        check_pi_specializations(seed=seed + 2),
        check_step_size_boundary(seed=seed + 3),
        check_u_prime_negative(seed=seed + 4),
        check_kolmogorov_gap(seed=seed + 5),
        check_slow_manifold(seed=seed + 6),
    ]


def all_passed(results: Sequence[IdentityResult]) -> bool:
    return all(r.passed for r in results)
