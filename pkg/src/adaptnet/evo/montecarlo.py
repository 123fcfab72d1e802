"""Compiled Monte Carlo strategy evolution and fixation estimates.

Each run owns a splitmix64 stream seeded from (master seed, stream id, run
index), so results do not depend on how runs are spread over threads.
Node fitness is kept current incrementally: a flip at node y rewrites y's
fitness and shifts each neighbor's by the change in its payoff against y.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numba
import numpy as np

from ..topology import Topology
from .payoff import UtilityMatrix2
from .state import S_M, evenly_spaced_placement

RULE_CODES = {"IM": 0, "BD": 1, "DB": 2}
FIXED_M, FIXED_R, CENSORED = 1, 0, -1
DEFAULT_STEP_LIMIT = 10_000_000

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = np.uint64(30), np.uint64(27), np.uint64(31), np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@numba.njit(inline="always")
def _next_u64(state):
    state[0] += _GOLDEN
    z = state[0]
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@numba.njit(inline="always")
def _uniform(state):
    return float(_next_u64(state) >> _S11) * _INV53


@numba.njit(inline="always")
def _randint(state, n):
    k = int(_uniform(state) * n)
    return k if k < n else n - 1


@numba.njit(cache=True)
def _node_fitness(i, s, indptr, indices, V, alpha):
    acc = 0.0
    si = s[i]
    for p in range(indptr[i], indptr[i + 1]):
        acc += V[si, s[indices[p]]]
    return (1.0 - alpha) + alpha * acc


@numba.njit(cache=True)
def _flip(y, s, fit, indptr, indices, V, alpha):
    old = s[y]
    new = 1 - old
    s[y] = new
    for p in range(indptr[y], indptr[y + 1]):
        k = indices[p]
        fit[k] += alpha * (V[s[k], new] - V[s[k], old])
    fit[y] = _node_fitness(y, s, indptr, indices, V, alpha)
    return 1 if new == 1 else -1


@numba.njit(cache=True)
def _evolve(s, indptr, indices, V, alpha, rule, max_steps, fmax, rng):
    """Advance ``s`` in place until absorption or ``max_steps`` events.

    Returns (events taken, number of S_m nodes at the end).
    """
    N = s.shape[0]
    fit = np.empty(N)
    n_m = 0
    for i in range(N):
        fit[i] = _node_fitness(i, s, indptr, indices, V, alpha)
        n_m += s[i]
    steps = 0
    while 0 < n_m < N and steps < max_steps:
        steps += 1
        if rule == 1:
            # birth-death: fitness-proportional parent by rejection, uniform neighbor dies
            while True:
                j = _randint(rng, N)
                if _uniform(rng) * fmax < fit[j]:
                    break
            deg = indptr[j + 1] - indptr[j]
            y = indices[indptr[j] + _randint(rng, deg)]
            if s[y] != s[j]:
                n_m += _flip(y, s, fit, indptr, indices, V, alpha)
            continue
        x = _randint(rng, N)
        total = 0.0 if rule == 2 else fit[x]
        for p in range(indptr[x], indptr[x + 1]):
            total += fit[indices[p]]
        r = _uniform(rng) * total
        chosen = x
        acc = 0.0 if rule == 2 else fit[x]
        if r >= acc:
            chosen = indices[indptr[x + 1] - 1]
            for p in range(indptr[x], indptr[x + 1]):
                acc += fit[indices[p]]
                if r < acc:
                    chosen = indices[p]
                    break
        if s[chosen] != s[x]:
            n_m += _flip(x, s, fit, indptr, indices, V, alpha)
    return steps, n_m


@numba.njit(cache=True, parallel=True)
def _fixation_batch(s0, indptr, indices, V, alpha, rule, max_steps, fmax, seeds):
    runs, N = s0.shape
    outcome = np.empty(runs, dtype=np.int8)
    steps = np.empty(runs, dtype=np.int64)
    for r in numba.prange(runs):
        s = s0[r].copy()
        rng = np.empty(1, dtype=np.uint64)
        rng[0] = seeds[r]
        k, n_m = _evolve(s, indptr, indices, V, alpha, rule, max_steps, fmax, rng)
        steps[r] = k
        if n_m == N:
            outcome[r] = 1
        elif n_m == 0:
            outcome[r] = 0
        else:
            outcome[r] = -1
    return outcome, steps


def run_seeds(seed: int, runs: int, stream: int = 0) -> np.ndarray:
    return np.random.SeedSequence([int(seed), int(stream)]).generate_state(runs, dtype=np.uint64)


def fitness_bounds(topology: Topology, U: UtilityMatrix2, alpha: float) -> tuple[float, float]:
    V = U.as_array()
    k = topology.max_degree - 1
    lo = (1 - alpha) + alpha * k * min(V.min(), 0.0)
    hi = (1 - alpha) + alpha * k * max(V.max(), 0.0)
    return lo, hi


def _kernel_args(topology: Topology, U: UtilityMatrix2, alpha: float, rule: str):
    if rule not in RULE_CODES:
        raise ValueError(f"unknown update rule {rule!r}; choose IM, BD or DB")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"selection intensity must lie in [0, 1], got {alpha}")
    lo, hi = fitness_bounds(topology, U, alpha)
    if lo <= 0:
        raise ValueError(f"fitness can reach {lo:.3g}; selection weights must stay positive")
    indptr, indices = topology.csr
    return indptr, indices, U.as_array(), float(alpha), RULE_CODES[rule], float(hi)


@dataclass(frozen=True)
class FixationEstimate:
    runs: int
    fixed: int
    lost: int
    censored: int
    mean_steps: float

    @property
    def estimate(self) -> float:
        return self.fixed / self.runs

    @property
    def reliable(self) -> bool:
        return self.runs >= 2

    @property
    def stderr(self) -> float:
        if not self.reliable:
            return float("nan")
        p = self.estimate
        return math.sqrt(p * (1 - p) / self.runs)

    def ci95(self) -> tuple[float, float]:
        half = 1.96 * self.stderr
        return self.estimate - half, self.estimate + half


def simulate_runs(topology: Topology, U: UtilityMatrix2, alpha: float, init: np.ndarray, *,
                  runs: int, seed: int, rule: str = "IM", step_limit: int = DEFAULT_STEP_LIMIT,
                  stream: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Per-run outcomes (1 S_m fixed, 0 S_r fixed, -1 censored) and event counts.

    ``init`` is one strategy vector shared by all runs or one row per run.
    """
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    s0 = np.asarray(init, dtype=np.int8)
    if s0.ndim == 1:
        s0 = np.broadcast_to(s0, (runs, s0.shape[0]))
    s0 = np.ascontiguousarray(s0)
    if s0.shape != (runs, topology.node_count):
        raise ValueError(f"initial states have shape {s0.shape}, expected "
                         f"({runs}, {topology.node_count})")
    args = _kernel_args(topology, U, alpha, rule)
    return _fixation_batch(s0, *args[:5], int(step_limit), args[5], run_seeds(seed, runs, stream))


def summarize(outcome: np.ndarray, steps: np.ndarray) -> FixationEstimate:
    return FixationEstimate(runs=len(outcome), fixed=int(np.sum(outcome == FIXED_M)),
                            lost=int(np.sum(outcome == FIXED_R)),
                            censored=int(np.sum(outcome == CENSORED)),
                            mean_steps=float(steps.mean()))


def fixation_probability(topology: Topology, U: UtilityMatrix2, alpha: float, *,
                         runs: int, seed: int, init: np.ndarray | str = "evenly_spaced",
                         rule: str = "IM", step_limit: int = DEFAULT_STEP_LIMIT,
                         stream: int = 0) -> FixationEstimate:
    """Fraction of runs in which S_m takes over the whole graph."""
    if isinstance(init, str):
        if init != "evenly_spaced":
            raise ValueError(f"unknown placement policy {init!r}")
        init = evenly_spaced_placement(topology)
    out, steps = simulate_runs(topology, U, alpha, init, runs=runs, seed=seed, rule=rule,
                               step_limit=step_limit, stream=stream)
    return summarize(out, steps)


def strategy_evolution_rule_compare(topology: Topology, U: UtilityMatrix2, alpha: float, *,
                                    runs: int, seed: int,
                                    init: np.ndarray | str = "evenly_spaced",
                                    step_limit: int = DEFAULT_STEP_LIMIT,
                                    rules: tuple[str, ...] = ("IM", "BD", "DB"),
                                    ) -> dict[str, FixationEstimate]:
    """Fixation estimates for several update rules, each on its own random stream."""
    if not topology.is_regular:
        warnings.warn(f"{topology.name} is not regular; rule equivalence is not expected",
                      stacklevel=2)
    return {rule: fixation_probability(topology, U, alpha, runs=runs, seed=seed, init=init,
                                       rule=rule, step_limit=step_limit,
                                       stream=1 + RULE_CODES[rule])
            for rule in rules}


def evolve_with_snapshots(topology: Topology, U: UtilityMatrix2, alpha: float, init: np.ndarray, *,
                          seed: int, rule: str = "IM", step_limit: int = DEFAULT_STEP_LIMIT,
                          every: int = 1000,
                          on_snapshot: Callable[[int, np.ndarray], None] | None = None,
                          run: int = 0, stream: int = 0) -> tuple[int, int]:
    """Single run that reports the strategy field every ``every`` events.

    Calls ``on_snapshot(step, strategies)`` at step 0, at every multiple of
    ``every`` and at the end.  With the same (seed, stream), run ``run``
    follows exactly the path of row ``run`` in :func:`simulate_runs`.
    Returns (events taken, final S_m count).
    """
    if every < 1:
        raise ValueError(f"snapshot interval must be >= 1, got {every}")
    indptr, indices, V, a, code, fmax = _kernel_args(topology, U, alpha, rule)
    s = np.array(init, dtype=np.int8)
    rng = np.array([run_seeds(seed, run + 1, stream)[run]], dtype=np.uint64)
    done, n_m = 0, int(s.sum())
    if on_snapshot:
        on_snapshot(0, s.copy())
    while 0 < n_m < len(s) and done < step_limit:
        k, n_m = _evolve(s, indptr, indices, V, a, code, min(every, step_limit - done), fmax, rng)
        done += k
        if on_snapshot:
            on_snapshot(done, s.copy())
    return done, n_m


def initial_strategies_from_fraction(N: int, share_r: float, runs: int, seed: int) -> np.ndarray:
    """One random layout per run with round(share_r * N) S_r nodes and S_m elsewhere."""
    n_r = int(round(share_r * N))
    rng = np.random.default_rng([int(seed), 99])
    s = np.full((runs, N), S_M, dtype=np.int8)
    for r in range(runs):
        s[r, rng.choice(N, size=n_r, replace=False)] = 0
    return s
