"""Combiner policies selected by name in experiment configs.

Names:
  uniform | max_degree | laplacian | rel_degree | rel_degree_var | metropolis | hastings
  egt_im:<fitness> | egt_bd:<fitness> | egt_db:<fitness>
  error_aware_pow | error_aware_exp

``<fitness>`` is one of the fitness-table names or ``error_pow`` / ``error_exp``
for the MSE-driven fitness.  Static policies return one (N, N) matrix; the
error-driven ones return per-run matrices built from the current MSE
estimates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .combiners import RULES, combination_matrix, validate_row
from .egt_combiners import TABLE2_RULES, error_aware_log_fitness, table2_row
from .signal_model import NodeProfile
from .topology import Topology


@dataclass
class StaticPolicy:
    name: str
    weights: np.ndarray
    forgetting: float | None = None

    def matrix(self, beta: np.ndarray) -> np.ndarray:
        return self.weights


@dataclass
class ErrorAwarePolicy:
    """Fitness from each node's running MSE estimate, mixed by the IM, BD or DB rule."""

    name: str
    topology: Topology
    update: str = "im"
    form: str = "power"
    lam: float = 2.0
    forgetting: float | None = 0.05
    floor: float | None = None
    _mask: np.ndarray = field(init=False, repr=False)
    _off: np.ndarray = field(init=False, repr=False)
    _deg: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.update not in ("im", "bd", "db"):
            raise ValueError(f"unknown update rule {self.update!r}")
        self._mask = self.topology.support
        self._off = self._mask & ~np.eye(self.topology.node_count, dtype=bool)
        self._deg = self.topology.degrees.astype(float)

    def matrix(self, beta: np.ndarray) -> np.ndarray:
        logf = error_aware_log_fitness(beta, self.form, self.lam, self.floor)
        N = self.topology.node_count
        eye = np.eye(N, dtype=bool)
        if self.update == "bd":
            g = np.exp(logf - logf.max(axis=-1, keepdims=True))
            g = g / g.sum(axis=-1, keepdims=True)
            W = np.where(self._off, (g / self._deg)[..., None, :], 0.0)
        else:
            scaled = np.where(self._mask, logf[..., None, :], -np.inf)
            scaled = np.exp(scaled - scaled.max(axis=-1, keepdims=True))
            W = scaled / scaled.sum(axis=-1, keepdims=True)
            if self.update == "im":
                return W
            W = np.where(self._off, W / self._deg[:, None], 0.0)
        return np.where(eye, (1.0 - W.sum(axis=-1))[..., None], W)


def _parse_egt(name: str) -> tuple[str, str]:
    head, _, fit = name.partition(":")
    return head.removeprefix("egt_"), fit


def resolve_policy(name: str, topology: Topology, profiles: Sequence[NodeProfile] | None = None, *,
                   lam_power: float = 2.0, lam_exp: float = 1.0, nu: float = 0.05,
                   beta_floor: float | None = None, inclusive: bool = True):
    if name in RULES:
        return StaticPolicy(name, combination_matrix(name, topology, profiles, inclusive))
    if name == "error_aware_pow":
        return ErrorAwarePolicy(name, topology, "im", "power", lam_power, nu, beta_floor)
    if name == "error_aware_exp":
        return ErrorAwarePolicy(name, topology, "im", "exponential", lam_exp, nu, beta_floor)
    if name.startswith(("egt_im:", "egt_bd:", "egt_db:")):
        update, fit = _parse_egt(name)
        if fit == "error_pow":
            return ErrorAwarePolicy(name, topology, update, "power", lam_power, nu, beta_floor)
        if fit == "error_exp":
            return ErrorAwarePolicy(name, topology, update, "exponential", lam_exp, nu, beta_floor)
        if fit in TABLE2_RULES:
            rows = [validate_row(table2_row(update, fit, topology, profiles, i), topology, i)
                    for i in range(topology.node_count)]
            return StaticPolicy(name, np.vstack(rows))
        raise ValueError(f"unknown fitness {fit!r} in policy {name!r}")
    raise ValueError(f"unknown combiner policy {name!r}")


def is_valid_policy_name(name: str) -> bool:
    if name in RULES or name in ("error_aware_pow", "error_aware_exp"):
        return True
    if name.startswith(("egt_im:", "egt_bd:", "egt_db:")):
        return _parse_egt(name)[1] in TABLE2_RULES + ("error_pow", "error_exp")
    return False
