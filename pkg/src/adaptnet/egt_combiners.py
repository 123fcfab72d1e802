"""Combiner weights built from fitness under the BD, DB and IM update rules.

A node's combiner row is read as a mixed strategy over its neighborhood:
the weight on neighbor j is the probability that the node would adopt j's
information under the chosen update rule.  Fitness is f = (1 - a) B + a U.
Plugging the fitness definitions of ``fitness_table2`` into ``im_weights``
recovers the static rules in :mod:`adaptnet.combiners` exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .combiners import CombinerRowError, validate_row
from .signal_model import DataSample, NodeProfile
from .topology import Topology

TABLE2_RULES = ("uniform", "max_degree", "laplacian", "rel_degree", "rel_degree_var")
ERROR_FORMS = ("power", "exponential")


class FitnessError(ValueError):
    """Fitness that cannot serve as a selection weight (non-positive or singular)."""


def fitness(baseline: float, alpha: float, utility: float) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"selection intensity must lie in [0, 1], got {alpha}")
    return (1.0 - alpha) * baseline + alpha * utility


def fitness_table2(rule: str, topology: Topology, profiles: Sequence[NodeProfile] | None,
                   i: int, j: int) -> float:
    """Fitness of node j as seen by node i when i updates its combiner."""
    if rule == "uniform":
        return 1.0
    if rule == "max_degree":
        return float(topology.node_count - topology.degree(i) + 1) if j == i else 1.0
    if rule == "laplacian":
        return float(topology.max_degree - topology.degree(i) + 1) if j == i else 1.0
    if rule == "rel_degree":
        return float(topology.degree(j))
    if rule == "rel_degree_var":
        if profiles is None:
            raise ValueError("rel_degree_var fitness needs node profiles")
        return topology.degree(j) / profiles[j].noise_variance
    if rule in ("metropolis", "hastings"):
        raise ValueError(f"{rule} is built from pairwise utility matrices under strong "
                         f"selection; use strong_selection_row instead")
    raise ValueError(f"unknown fitness rule {rule!r}")


def _check_positive(f: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.size == 0 or not np.all(np.isfinite(f)) or f.min() <= 0:
        raise FitnessError(f"fitness values must be finite and positive, got {f}")
    return f


def im_weights(f: Sequence[float]) -> np.ndarray:
    """IM rule: weight f_j / sum_k f_k over the neighborhood members given."""
    f = _check_positive(f)
    return f / f.sum()


def im_row(topology: Topology, i: int, f_hood: Sequence[float]) -> np.ndarray:
    """Dense IM row for node i from fitness listed in ``neighborhood(i)`` order."""
    hood = list(topology.neighborhood(i))
    row = np.zeros(topology.node_count)
    row[hood] = im_weights(f_hood)
    return row


def _self_complete(row: np.ndarray, topology: Topology, i: int) -> np.ndarray:
    row[i] = 1.0 - row.sum()
    if row[i] < -1e-12:
        raise CombinerRowError(f"node {i}: self weight {row[i]:.3g} is negative")
    return row


def bd_weights(f_all: Sequence[float], topology: Topology, i: int) -> np.ndarray:
    """BD rule.  ``f_all`` holds the fitness of every node in the network."""
    f = _check_positive(f_all)
    if f.shape != (topology.node_count,):
        raise ValueError(f"BD needs fitness for all {topology.node_count} nodes, got {f.shape}")
    row = np.zeros(topology.node_count)
    total = f.sum()
    for j in topology.neighbors(i):
        row[j] = f[j] / total / topology.degree(j)
    return _self_complete(row, topology, i)


def db_weights(f_all: Sequence[float], topology: Topology, i: int) -> np.ndarray:
    """DB rule.  Only the entries of ``f_all`` inside N_i are read."""
    f = np.asarray(f_all, dtype=float)
    hood = list(topology.neighborhood(i))
    fh = _check_positive(f[hood])
    row = np.zeros(topology.node_count)
    local_total = fh.sum()
    for j in topology.neighbors(i):
        row[j] = f[j] / local_total / topology.degree(i)
    return _self_complete(row, topology, i)


def table2_row(update: str, rule: str, topology: Topology,
               profiles: Sequence[NodeProfile] | None, i: int) -> np.ndarray:
    f_all = np.array([fitness_table2(rule, topology, profiles, i, j)
                      for j in range(topology.node_count)])
    if update == "im":
        return im_row(topology, i, f_all[list(topology.neighborhood(i))])
    if update == "bd":
        return bd_weights(f_all, topology, i)
    if update == "db":
        return db_weights(f_all, topology, i)
    raise ValueError(f"unknown update rule {update!r}")


# ---------------------------------------------------------------- strong selection

def pairwise_utility_matrix(rule: str, topology: Topology, profiles: Sequence[NodeProfile] | None,
                            i: int, j: int, inclusive: bool = True) -> np.ndarray:
    """2x2 utility between node i (row/col 0) and neighbor j (row/col 1).

    Off-diagonals are the pair weights; diagonals are the residual self
    weights 1 - sum of the node's off-diagonal utilities over all its
    neighbors.  For Hastings the pair variance is the variance of the node
    being weighted (sigma_j^2 on i's row).
    """
    def size(k: int) -> int:
        return topology.degree(k) if inclusive else topology.degree(k) - 1

    def pair(a: int, b: int) -> float:
        if rule == "metropolis":
            return 1.0 / max(size(a), size(b))
        if rule == "hastings":
            s2 = [p.noise_variance for p in profiles]
            return s2[b] / max(size(a) * s2[a], size(b) * s2[b])
        raise ValueError(f"no pairwise utility for rule {rule!r}")

    def residual(a: int) -> float:
        return 1.0 - sum(pair(a, k) for k in topology.neighbors(a))

    return np.array([[residual(i), pair(i, j)], [pair(j, i), residual(j)]])


def strong_selection_row(rule: str, topology: Topology, profiles: Sequence[NodeProfile] | None,
                         i: int, inclusive: bool = True) -> np.ndarray:
    """Row for node i when fitness equals utility (selection intensity 1).

    Each neighbor's weight is i's payoff against that neighbor; the self
    weight is i's diagonal payoff, which must agree across all pairings.
    """
    row = np.zeros(topology.node_count)
    diag = []
    for j in topology.neighbors(i):
        U = pairwise_utility_matrix(rule, topology, profiles, i, j, inclusive)
        row[j] = fitness(0.0, 1.0, U[0, 1])
        diag.append(U[0, 0])
    if diag:
        if max(diag) - min(diag) > 1e-15:
            raise CombinerRowError(f"node {i}: inconsistent self utility across pairings")
        row[i] = diag[0]
    else:
        row[i] = 1.0
    return validate_row(row, topology, i)


# ---------------------------------------------------------------- error-aware fitness

@dataclass(frozen=True)
class ErrorTracker:
    beta: float = 1.0
    forgetting: float = 0.05
    exponent: float = 2.0
    form: str = "power"

    def __post_init__(self) -> None:
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if not 0 < self.forgetting <= 1:
            raise ValueError(f"forgetting factor must lie in (0, 1], got {self.forgetting}")
        if self.exponent <= 0:
            raise ValueError(f"exponent must be positive, got {self.exponent}")
        if self.form not in ERROR_FORMS:
            raise ValueError(f"form must be one of {ERROR_FORMS}, got {self.form!r}")


def instantaneous_error(w_prev: np.ndarray, u: np.ndarray, d: np.ndarray | float) -> np.ndarray:
    """Squared a-priori error |d - u.w_prev|^2; broadcasts over leading axes."""
    e = np.asarray(d) - np.sum(np.asarray(u) * np.asarray(w_prev), axis=-1)
    return e * e


def update_beta(beta: np.ndarray | float, err2: np.ndarray | float, nu: float) -> np.ndarray:
    return (1.0 - nu) * np.asarray(beta) + nu * np.asarray(err2)


def error_aware_update(tracker: ErrorTracker, w_prev: np.ndarray, sample: DataSample) -> ErrorTracker:
    err2 = float(instantaneous_error(w_prev, sample.regressor, sample.measurement))
    return replace(tracker, beta=float(update_beta(tracker.beta, err2, tracker.forgetting)))


def error_aware_fitness(beta: Sequence[float] | np.ndarray, form: str, lam: float,
                        floor: float | None = None) -> np.ndarray:
    """Power fitness beta^-lam or exponential fitness exp(-lam beta).

    ``floor`` clamps beta from below before the power form is evaluated;
    without it a zero beta is an error.
    """
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    b = np.asarray(beta, dtype=float)
    if np.any(b < 0):
        raise FitnessError("mse estimates must be non-negative")
    if form == "power":
        if floor is not None:
            b = np.maximum(b, floor)
        if np.any(b == 0):
            raise FitnessError("power-form fitness is singular at beta = 0")
        return b ** (-lam)
    if form == "exponential":
        return np.exp(-lam * b)
    raise ValueError(f"form must be one of {ERROR_FORMS}, got {form!r}")


def error_aware_log_fitness(beta: np.ndarray, form: str, lam: float,
                            floor: float | None = None) -> np.ndarray:
    """log of :func:`error_aware_fitness`, safe for very small or large beta."""
    b = np.asarray(beta, dtype=float)
    if form == "power":
        if floor is not None:
            b = np.maximum(b, floor)
        if np.any(b <= 0):
            raise FitnessError("power-form fitness is singular at beta = 0")
        return -lam * np.log(b)
    if form == "exponential":
        return -lam * b
    raise ValueError(f"form must be one of {ERROR_FORMS}, got {form!r}")


# ---------------------------------------------------------------- Wright-Fisher

def wright_fisher_step(p: Sequence[float], U: np.ndarray) -> np.ndarray:
    """p_i <- p_i f_i / phi with f = U p and phi = p . f."""
    p = np.asarray(p, dtype=float)
    U = np.asarray(U, dtype=float)
    if p.min() < 0 or not math.isclose(p.sum(), 1.0, abs_tol=1e-12):
        raise ValueError(f"shares must lie on the simplex, got {p}")
    f = U @ p
    phi = float(p @ f)
    if phi <= 0:
        raise FitnessError(f"average fitness {phi} is not positive")
    return p * f / phi
