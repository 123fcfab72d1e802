"""Static combination rules.

Each constructor returns a dense length-N weight row for node ``i``; entries
outside the closed neighborhood N_i are zero.  ``combination_matrix`` stacks
the rows for all nodes.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .signal_model import NodeProfile
from .topology import Topology

ROW_TOL = 1e-12


class CombinerRowError(ValueError):
    """A weight row is negative, leaks outside N_i, or does not sum to one."""


def validate_row(row: np.ndarray, topology: Topology, i: int, tol: float = ROW_TOL) -> np.ndarray:
    row = np.asarray(row, dtype=float)
    if row.shape != (topology.node_count,):
        raise CombinerRowError(f"node {i}: row has shape {row.shape}, "
                               f"expected ({topology.node_count},)")
    if not np.all(np.isfinite(row)):
        raise CombinerRowError(f"node {i}: non-finite weight in row")
    if row.min() < -tol:
        j = int(row.argmin())
        raise CombinerRowError(f"node {i}: negative weight {row[j]:.3g} on node {j}")
    outside = np.ones(topology.node_count, dtype=bool)
    outside[list(topology.neighborhood(i))] = False
    if np.any(row[outside] != 0.0):
        raise CombinerRowError(f"node {i}: weight placed outside its neighborhood")
    total = row.sum()
    if abs(total - 1.0) > tol:
        raise CombinerRowError(f"node {i}: row sums to {total!r}")
    return row


def _noise(profiles: Sequence[NodeProfile]) -> np.ndarray:
    return np.array([p.noise_variance for p in profiles], dtype=float)


def _size(topology: Topology, k: int, inclusive: bool) -> int:
    return topology.degree(k) if inclusive else topology.degree(k) - 1


def _complete_self(row: np.ndarray, i: int) -> np.ndarray:
    row[i] = 0.0
    row[i] = 1.0 - row.sum()
    return row


def uniform(topology: Topology, i: int) -> np.ndarray:
    row = np.zeros(topology.node_count)
    row[list(topology.neighborhood(i))] = 1.0 / topology.degree(i)
    return row


def maximum_degree(topology: Topology, i: int) -> np.ndarray:
    N = topology.node_count
    row = np.zeros(N)
    row[list(topology.neighbors(i))] = 1.0 / N
    row[i] = 1.0 - (topology.degree(i) - 1) / N
    return row


def laplacian(topology: Topology, i: int) -> np.ndarray:
    n_max = topology.max_degree
    row = np.zeros(topology.node_count)
    row[list(topology.neighbors(i))] = 1.0 / n_max
    row[i] = 1.0 - (topology.degree(i) - 1) / n_max
    return row


def relative_degree(topology: Topology, i: int) -> np.ndarray:
    hood = list(topology.neighborhood(i))
    row = np.zeros(topology.node_count)
    row[hood] = topology.degrees[hood]
    return row / row.sum()


def relative_degree_variance(topology: Topology, profiles: Sequence[NodeProfile], i: int) -> np.ndarray:
    hood = list(topology.neighborhood(i))
    row = np.zeros(topology.node_count)
    row[hood] = topology.degrees[hood] / _noise(profiles)[hood]
    return row / row.sum()


def metropolis(topology: Topology, i: int, inclusive: bool = True) -> np.ndarray:
    row = np.zeros(topology.node_count)
    ni = _size(topology, i, inclusive)
    for j in topology.neighbors(i):
        row[j] = 1.0 / max(ni, _size(topology, j, inclusive))
    return _complete_self(row, i)


def hastings(topology: Topology, profiles: Sequence[NodeProfile], i: int,
             inclusive: bool = True) -> np.ndarray:
    """Hastings row with sigma_j^2 in the numerator, so noisier neighbors get more
    weight; this mirrors the published table and is not a typo here."""
    s2 = _noise(profiles)
    row = np.zeros(topology.node_count)
    ni = _size(topology, i, inclusive)
    for j in topology.neighbors(i):
        row[j] = s2[j] / max(ni * s2[i], _size(topology, j, inclusive) * s2[j])
    return _complete_self(row, i)


RULES: dict[str, Callable[..., np.ndarray]] = {
    "uniform": lambda topo, prof, i, inclusive=True: uniform(topo, i),
    "max_degree": lambda topo, prof, i, inclusive=True: maximum_degree(topo, i),
    "laplacian": lambda topo, prof, i, inclusive=True: laplacian(topo, i),
    "rel_degree": lambda topo, prof, i, inclusive=True: relative_degree(topo, i),
    "rel_degree_var": lambda topo, prof, i, inclusive=True: relative_degree_variance(topo, prof, i),
    "metropolis": lambda topo, prof, i, inclusive=True: metropolis(topo, i, inclusive),
    "hastings": lambda topo, prof, i, inclusive=True: hastings(topo, prof, i, inclusive),
}


def combination_matrix(rule: str, topology: Topology, profiles: Sequence[NodeProfile] | None = None,
                       inclusive: bool = True) -> np.ndarray:
    """Validated N x N row-stochastic matrix for a rule named as in the config."""
    try:
        build = RULES[rule]
    except KeyError:
        raise ValueError(f"unknown combination rule {rule!r}; choose from {sorted(RULES)}") from None
    rows = [validate_row(build(topology, profiles, i, inclusive), topology, i)
            for i in range(topology.node_count)]
    return np.vstack(rows)
