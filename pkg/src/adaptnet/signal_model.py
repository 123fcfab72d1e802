"""Streaming data for the per-node linear regression model d = u.w0 + v.

Regressors are real, zero-mean Gaussian with covariance diag(zeta); only the
trace and squared norm of the spectrum matter downstream, so the eigenbasis
is fixed to the identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class NodeProfile:
    noise_variance: float
    step_size: float
    regressor_spectrum: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "regressor_spectrum",
                           tuple(float(z) for z in self.regressor_spectrum))
        if self.noise_variance < 0:
            raise ValueError(f"noise variance must be >= 0, got {self.noise_variance}")
        if self.step_size < 0:
            raise ValueError(f"step size must be >= 0, got {self.step_size}")
        if not self.regressor_spectrum or min(self.regressor_spectrum) <= 0:
            raise ValueError(f"regressor spectrum must be non-empty and positive, "
                             f"got {self.regressor_spectrum}")

    @property
    def dim(self) -> int:
        return len(self.regressor_spectrum)

    @property
    def trace(self) -> float:
        """Tr(R_u)."""
        return float(sum(self.regressor_spectrum))

    @property
    def spectrum_norm2(self) -> float:
        """||zeta||^2, the squared norm of the eigenvalue vector."""
        return float(sum(z * z for z in self.regressor_spectrum))


@dataclass(frozen=True)
class DataSample:
    regressor: np.ndarray
    measurement: float


def make_true_parameter(M: int) -> np.ndarray:
    """All-ones vector of length M scaled by 1/sqrt(2)."""
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    return np.ones(M) / np.sqrt(2.0)


def sample(profile: NodeProfile, w0: np.ndarray, rng: np.random.Generator) -> DataSample:
    if len(w0) != profile.dim:
        raise ValueError(f"w0 has length {len(w0)}, profile expects {profile.dim}")
    u = rng.standard_normal(profile.dim) * np.sqrt(profile.regressor_spectrum)
    v = rng.standard_normal() * np.sqrt(profile.noise_variance)
    return DataSample(u, float(u @ w0 + v))


def node_streams(seed: int, n_nodes: int, stream: int = 0) -> list[np.random.Generator]:
    """One independent generator per node, keyed by (seed, stream, node id)."""
    return [np.random.default_rng([int(seed), int(stream), i]) for i in range(n_nodes)]


class SignalSource:
    """Draws one time step of data for every node, optionally for a batch of runs.

    Node ``i`` always reads from its own generator, so the data seen by a node
    does not depend on how many other nodes exist or on the order they are
    drawn in.  The source is independent of whatever algorithm consumes it,
    which lets competing combiners be compared on identical data.
    """

    def __init__(self, profiles: Sequence[NodeProfile], w0: np.ndarray, seed: int,
                 runs: int | None = None, stream: int = 0):
        dims = {p.dim for p in profiles}
        if dims != {len(w0)}:
            raise ValueError(f"profile dimensions {sorted(dims)} do not match w0 length {len(w0)}")
        self.w0 = np.asarray(w0, dtype=float)
        self.runs = runs
        self._scale_u = np.array([np.sqrt(p.regressor_spectrum) for p in profiles])
        self._scale_v = np.sqrt([p.noise_variance for p in profiles])
        self._rngs = node_streams(seed, len(profiles), stream)

    def draw(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (u, d) with shapes (N, M), (N) or (runs, N, M), (runs, N)."""
        lead = () if self.runs is None else (self.runs,)
        M = len(self.w0)
        z = np.stack([g.standard_normal(lead + (M + 1,)) for g in self._rngs], axis=-2)
        u = z[..., :M] * self._scale_u
        d = u @ self.w0 + z[..., M] * self._scale_v
        return u, d
