"""Strategy configuration of a network and single-event update rules.

The step functions here are the readable reference implementation: one
event per call, driven by a numpy Generator.  Long Monte Carlo runs use the
compiled kernels in :mod:`adaptnet.evo.montecarlo`, which implement the same
events.
"""

from __future__ import annotations

import numpy as np

from ..topology import Topology
from .payoff import UtilityMatrix2

S_R, S_M = 0, 1


class PlacementError(ValueError):
    """The requested initial strategy layout cannot be realized on the graph."""


class EvoState:
    """Per-node strategies plus node and edge counts kept up to date on every flip.

    Edge fractions use ordered pairs: p_mm + p_rm + p_mr + p_rr = 1 with
    p_rm = p_mr.  Conditionals q_{X|Y} = p_XY / p_Y are NaN when p_Y = 0.
    """

    def __init__(self, topology: Topology, strategies: np.ndarray):
        s = np.asarray(strategies, dtype=np.int8).copy()
        if s.shape != (topology.node_count,) or not np.isin(s, (S_R, S_M)).all():
            raise ValueError("strategies must be a 0/1 vector with one entry per node")
        self.topology = topology
        self.strategies = s
        self._recount()

    def _recount(self) -> None:
        s = self.strategies
        e = np.array(self.topology.edges, dtype=np.int64).reshape(-1, 2)
        kinds = s[e[:, 0]] + s[e[:, 1]] if len(e) else np.zeros(0)
        self.n_m = int(s.sum())
        self.edges_rr = int(np.sum(kinds == 0))
        self.edges_rm = int(np.sum(kinds == 1))
        self.edges_mm = int(np.sum(kinds == 2))

    def copy(self) -> "EvoState":
        return EvoState(self.topology, self.strategies)

    def flip(self, i: int) -> None:
        old = int(self.strategies[i])
        k_m = int(sum(self.strategies[j] for j in self.topology.neighbors(i)))
        k_r = self.topology.degree(i) - 1 - k_m
        self.strategies[i] = 1 - old
        if old == S_R:
            self.n_m += 1
            self.edges_rr -= k_r
            self.edges_rm += k_r - k_m
            self.edges_mm += k_m
        else:
            self.n_m -= 1
            self.edges_mm -= k_m
            self.edges_rm += k_m - k_r
            self.edges_rr += k_r

    def counts(self) -> tuple[int, int, int, int]:
        return self.n_m, self.edges_rr, self.edges_rm, self.edges_mm

    @property
    def N(self) -> int:
        return self.topology.node_count

    @property
    def p_m(self) -> float:
        return self.n_m / self.N

    @property
    def p_r(self) -> float:
        return 1.0 - self.p_m

    @property
    def _E(self) -> int:
        return self.edges_rr + self.edges_rm + self.edges_mm

    @property
    def p_mm(self) -> float:
        return self.edges_mm / self._E

    @property
    def p_rr(self) -> float:
        return self.edges_rr / self._E

    @property
    def p_rm(self) -> float:
        return self.edges_rm / (2 * self._E)

    def _cond(self, num: float, den: float) -> float:
        return num / den if den > 0 else float("nan")

    @property
    def q_mm(self) -> float:
        return self._cond(self.p_mm, self.p_mm + self.p_rm)

    @property
    def q_rm(self) -> float:
        return self._cond(self.p_rm, self.p_mm + self.p_rm)

    @property
    def q_rr(self) -> float:
        return self._cond(self.p_rr, self.p_rr + self.p_rm)

    @property
    def q_mr(self) -> float:
        return self._cond(self.p_rm, self.p_rr + self.p_rm)

    @property
    def absorbed(self) -> bool:
        return self.n_m in (0, self.N)


def node_fitness(state: EvoState, i: int, U: UtilityMatrix2, alpha: float) -> float:
    """(1 - alpha) + alpha * sum of i's payoffs against each neighbor."""
    V = U.as_array()
    s = state.strategies
    return (1.0 - alpha) + alpha * sum(V[s[i], s[j]] for j in state.topology.neighbors(i))


def _pick(weights: list[float], rng: np.random.Generator) -> int:
    w = np.asarray(weights, dtype=float)
    if w.min() <= 0:
        raise ValueError("fitness must be positive to act as a selection weight")
    return int(rng.choice(len(w), p=w / w.sum()))


def im_strategy_step(state: EvoState, U: UtilityMatrix2, alpha: float,
                     rng: np.random.Generator) -> EvoState:
    """Imitation: a random node keeps its strategy or copies a neighbor's, in
    proportion to fitness.  Mutates ``state`` and returns it."""
    x = int(rng.integers(state.N))
    cands = (x,) + state.topology.neighbors(x)
    c = cands[_pick([node_fitness(state, k, U, alpha) for k in cands], rng)]
    if state.strategies[c] != state.strategies[x]:
        state.flip(x)
    return state


def db_strategy_step(state: EvoState, U: UtilityMatrix2, alpha: float,
                     rng: np.random.Generator) -> EvoState:
    """Death-birth: a random node dies and copies a neighbor chosen by fitness."""
    x = int(rng.integers(state.N))
    cands = state.topology.neighbors(x)
    c = cands[_pick([node_fitness(state, k, U, alpha) for k in cands], rng)]
    if state.strategies[c] != state.strategies[x]:
        state.flip(x)
    return state


def bd_strategy_step(state: EvoState, U: UtilityMatrix2, alpha: float,
                     rng: np.random.Generator) -> EvoState:
    """Birth-death: a node chosen by fitness overwrites a uniformly random neighbor."""
    j = _pick([node_fitness(state, k, U, alpha) for k in range(state.N)], rng)
    nbrs = state.topology.neighbors(j)
    y = nbrs[int(rng.integers(len(nbrs)))]
    if state.strategies[y] != state.strategies[j]:
        state.flip(y)
    return state


STEPS = {"IM": im_strategy_step, "BD": bd_strategy_step, "DB": db_strategy_step}


def evenly_spaced_placement(topology: Topology, n: int | None = None) -> np.ndarray:
    """S_m on every (n+1)-th node so that each S_r node touches exactly one S_m node.

    ``n`` is the neighbor count of a regular graph (default: read from the
    graph).  Raises :class:`PlacementError` with the first offending node when
    the layout does not give every common node exactly one good neighbor.
    """
    if not topology.is_regular:
        raise PlacementError("evenly spaced placement needs a regular graph")
    n = topology.max_degree - 1 if n is None else n
    N = topology.node_count
    if N % (n + 1):
        raise PlacementError(f"N={N} is not divisible by n+1={n + 1}")
    s = np.zeros(N, dtype=np.int8)
    s[:: n + 1] = S_M
    for i in range(N):
        if s[i] == S_R:
            hits = sum(int(s[j]) for j in topology.neighbors(i))
            if hits != 1:
                raise PlacementError(f"common node {i} touches {hits} good nodes on "
                                     f"{topology.name}; need exactly one")
    return s


def random_placement(N: int, n_r: int, rng: np.random.Generator) -> np.ndarray:
    """All S_m except ``n_r`` uniformly chosen S_r nodes."""
    if not 0 <= n_r <= N:
        raise PlacementError(f"cannot place {n_r} S_r nodes among {N}")
    s = np.full(N, S_M, dtype=np.int8)
    s[rng.choice(N, size=n_r, replace=False)] = S_R
    return s
