"""Adapt-then-combine diffusion LMS and the centralized LMS baseline.

All array functions broadcast over leading axes, so the same code advances a
single network (estimates of shape (N, M)) or a batch of independent runs
((R, N, M)).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .combiners import ROW_TOL, CombinerRowError
from .egt_combiners import instantaneous_error, update_beta
from .signal_model import NodeProfile
from .topology import Topology


class CombinerPolicy(Protocol):
    name: str
    forgetting: float | None

    def matrix(self, beta: np.ndarray) -> np.ndarray:
        """Row-stochastic weights (N, N) or per run (R, N, N) given MSE estimates."""


@dataclass(frozen=True)
class NetworkState:
    estimates: np.ndarray
    mse_estimates: np.ndarray
    time: int = 0

    @classmethod
    def initial(cls, N: int, M: int, runs: int | None = None, beta0: float = 1.0,
                w_init: np.ndarray | None = None) -> "NetworkState":
        lead = () if runs is None else (runs,)
        w = np.zeros(lead + (N, M)) if w_init is None else np.broadcast_to(w_init, lead + (N, M)).copy()
        return cls(w, np.full(lead + (N,), float(beta0)), 0)


def lms_adapt(w: np.ndarray, u: np.ndarray, d: np.ndarray | float, mu: np.ndarray | float) -> np.ndarray:
    """w + mu u^T (d - u w), returned as a new array."""
    e = np.asarray(d) - np.sum(u * w, axis=-1)
    return w + (np.asarray(mu) * e)[..., None] * u


def combine(vectors: np.ndarray, weights: np.ndarray, tol: float = ROW_TOL) -> np.ndarray:
    """Convex combination sum_j weights[j] vectors[j] of neighbor estimates."""
    weights = np.asarray(weights, dtype=float)
    vectors = np.asarray(vectors, dtype=float)
    if weights.shape[0] != vectors.shape[0]:
        raise CombinerRowError(f"{weights.shape[0]} weights for {vectors.shape[0]} vectors")
    if weights.min() < -tol or abs(weights.sum() - 1.0) > tol:
        raise CombinerRowError(f"weights {weights} are not a convex combination")
    return weights @ vectors


def check_matrix(A: np.ndarray, support: np.ndarray, tol: float = ROW_TOL) -> None:
    """Vectorized row checks for (N, N) or (R, N, N) combiner matrices."""
    if not np.all(np.isfinite(A)):
        raise CombinerRowError("non-finite combiner weight")
    if A.min() < -tol:
        raise CombinerRowError(f"negative combiner weight {A.min():.3g}")
    if np.any(A[..., ~support] != 0):
        raise CombinerRowError("combiner weight outside a neighborhood")
    dev = np.abs(A.sum(axis=-1) - 1.0).max()
    if dev > tol:
        raise CombinerRowError(f"combiner row sums deviate from 1 by {dev:.3g}")


def global_lms_step(w: np.ndarray, u: np.ndarray, d: np.ndarray, mu: float) -> np.ndarray:
    """Centralized update using every node's data: w + mu sum_i u_i^T (d_i - u_i w)."""
    e = d - u @ w
    return w + mu * (e @ u)


def _random_mix(A: np.ndarray, psi: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    # each node copies one neighbor's adapted estimate, picked with probability A[i, j]
    A = np.broadcast_to(A, psi.shape[:-1] + (psi.shape[-2],))
    cdf = np.cumsum(A, axis=-1)
    draw = rng.random(psi.shape[:-1] + (1,)) * cdf[..., -1:]
    pick = np.minimum((draw > cdf).sum(axis=-1), psi.shape[-2] - 1)
    return np.take_along_axis(psi, np.broadcast_to(pick[..., None], psi.shape), axis=-2)


def network_step(state: NetworkState, topology: Topology, profiles: Sequence[NodeProfile],
                 policy: CombinerPolicy, data: tuple[np.ndarray, np.ndarray], *,
                 mixing: str = "deterministic", rng: np.random.Generator | None = None,
                 check: bool = True) -> NetworkState:
    """One synchronous ATC step from time t to t+1.

    ``data`` is the (u, d) pair every node observes at time t.  Each node
    refreshes its MSE estimate from its a-priori error (when the policy keeps
    one), adapts with LMS, and combines the adapted estimates of N_i.
    """
    u, d = data
    w = state.estimates
    mu = np.array([p.step_size for p in profiles])
    beta = state.mse_estimates
    if policy.forgetting is not None:
        beta = update_beta(beta, instantaneous_error(w, u, d), policy.forgetting)
    psi = lms_adapt(w, u, d, mu)
    A = policy.matrix(beta)
    if check:
        check_matrix(A, topology.support)
    if mixing == "deterministic":
        w_next = A @ psi
    elif mixing == "random":
        if rng is None:
            raise ValueError("random mixing needs an rng")
        w_next = _random_mix(A, psi, rng)
    else:
        raise ValueError(f"mixing must be 'deterministic' or 'random', got {mixing!r}")
    return NetworkState(w_next, beta, state.time + 1)
