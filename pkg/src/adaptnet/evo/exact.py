"""Exact fixation probabilities for small graphs by solving the absorbing chain.

States are bitmasks over nodes (bit i set when node i plays S_m).  Only
single-node flips change the state, so the absorption probabilities h solve
sum_x P(flip x | s) (h(s with x flipped) - h(s)) = 0 with h(all S_r) = 0 and
h(all S_m) = 1.  Practical up to about 14 nodes.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import spsolve

from ..topology import Topology
from .payoff import UtilityMatrix2

MAX_NODES = 14


def flip_probabilities(topology: Topology, U: UtilityMatrix2, alpha: float, rule: str) -> np.ndarray:
    """Array (2^N, N): probability that one event of ``rule`` flips node x in state s."""
    N = topology.node_count
    if N > MAX_NODES:
        raise ValueError(f"exact solve limited to {MAX_NODES} nodes, got {N}")
    A = topology.adjacency_matrix().astype(float)
    deg = A.sum(axis=1)
    states = np.arange(2 ** N)
    S = ((states[:, None] >> np.arange(N)) & 1).astype(float)
    k_m = S @ A
    k_r = deg - k_m
    u1, u2, u3, u4 = U.as_tuple()
    payoff = np.where(S == 1, k_m * u4 + k_r * u3, k_m * u2 + k_r * u1)
    F = (1 - alpha) + alpha * payoff
    if F.min() <= 0:
        raise ValueError("fitness must stay positive")
    # differ[s, x, c]: neighbor c of x plays the other strategy
    differ = (S[:, :, None] != S[:, None, :]) * A[None, :, :]
    pull = np.einsum("sxc,sc->sx", differ, F)
    rule = rule.upper()
    if rule == "IM":
        return pull / (F + F @ A) / N
    if rule == "DB":
        return pull / (F @ A) / N
    if rule == "BD":
        # a parent c with the other strategy is drawn and picks x among its deg(c) neighbors
        parent = F / F.sum(axis=1, keepdims=True) / deg
        return np.einsum("sxc,sc->sx", differ, parent)
    raise ValueError(f"unknown update rule {rule!r}")


def absorption_probabilities(topology: Topology, U: UtilityMatrix2, alpha: float,
                             rule: str = "IM") -> np.ndarray:
    """h[s] = probability that state s ends with every node playing S_m."""
    N = topology.node_count
    P = flip_probabilities(topology, U, alpha, rule)
    n_states = 2 ** N
    full = n_states - 1
    states = np.arange(n_states)
    interior = (states != 0) & (states != full)
    rows, cols, vals = [], [], []
    rhs = np.zeros(n_states)
    for s in range(n_states):
        if not interior[s]:
            rows.append(s), cols.append(s), vals.append(1.0)
            rhs[s] = 1.0 if s == full else 0.0
            continue
        out = P[s].sum()
        rows.append(s), cols.append(s), vals.append(-out)
        for x in range(N):
            if P[s, x] > 0:
                rows.append(s), cols.append(s ^ (1 << x)), vals.append(P[s, x])
    M = coo_matrix((vals, (rows, cols)), shape=(n_states, n_states)).tocsr()
    return spsolve(M, rhs)


def exact_fixation(topology: Topology, U: UtilityMatrix2, alpha: float, init: np.ndarray,
                   rule: str = "IM") -> float:
    """Probability that S_m fixes from the 0/1 strategy vector ``init``."""
    init = np.asarray(init, dtype=np.int64)
    s = int(np.sum(init << np.arange(len(init))))
    return float(absorption_probabilities(topology, U, alpha, rule)[s])
