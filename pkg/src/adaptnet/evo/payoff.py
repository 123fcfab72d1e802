"""Steady-state EMSE model and the 2x2 utility matrix between the two strategies.

Strategy index 0 is S_r (combine information from common nodes) and index 1
is S_m (combine information from good, low-noise nodes).  ``as_array()[X, Y]``
is the payoff of a player using X against one using Y.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class UtilityMatrix2:
    u1: float
    u2: float
    u3: float
    u4: float

    @classmethod
    def from_array(cls, U: np.ndarray) -> "UtilityMatrix2":
        U = np.asarray(U, dtype=float)
        return cls(U[0, 0], U[0, 1], U[1, 0], U[1, 1])

    def as_array(self) -> np.ndarray:
        return np.array([[self.u1, self.u2], [self.u3, self.u4]], dtype=float)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.u1, self.u2, self.u3, self.u4)

    @property
    def ordered(self) -> bool:
        """True when u1 < u3 < u2 < u4, the ordering the diffusion model relies on."""
        return self.u1 < self.u3 < self.u2 < self.u4

    def normalized(self) -> "UtilityMatrix2":
        """Divide every entry by the largest one, keeping weak selection weak."""
        top = max(self.as_tuple())
        if top <= 0:
            raise ValueError("cannot normalize a utility matrix without a positive entry")
        return UtilityMatrix2(*(u / top for u in self.as_tuple()))


def pi_emse(x: float, y: float, mu: float, trace_Ru: float, zeta_norm2: float) -> float:
    """Steady EMSE of a node with noise std ``x`` that uses a node with noise std ``y``."""
    x2, y2 = x * x, y * y
    c1 = mu * trace_Ru / 4.0
    c2 = mu * mu * zeta_norm2 / 2.0
    s1 = 2.0 * x2 * y2 / (x2 + y2)
    s2 = x2 * y2 / 2.0
    return c1 * s1 + c2 * x2 * x2 / s2


def step_size_bound(tau: float, trace_Ru: float, sigma_r2: float, zeta_norm2: float) -> float:
    """Largest step size for which the EMSE ordering, hence u1 < u3 < u2 < u4, holds."""
    if not 0 < tau < 1:
        raise ValueError(f"variance ratio must lie in (0, 1), got {tau}")
    return tau * trace_Ru * sigma_r2 / (4.0 * (1.0 + tau) * zeta_norm2)


def utility_from_pi(sigma_r2: float, sigma_m2: float, mu: float, trace_Ru: float,
                    zeta_norm2: float) -> UtilityMatrix2:
    """Utilities as inverse steady EMSE; warns when the step size is too large."""
    sr, sm = np.sqrt(sigma_r2), np.sqrt(sigma_m2)

    def inv(a: float, b: float) -> float:
        return 1.0 / pi_emse(a, b, mu, trace_Ru, zeta_norm2)

    U = UtilityMatrix2(inv(sr, sr), inv(sm, sr), inv(sr, sm), inv(sm, sm))
    if 0 < sigma_m2 < sigma_r2:
        bound = step_size_bound(sigma_m2 / sigma_r2, trace_Ru, sigma_r2, zeta_norm2)
        if mu >= bound:
            warnings.warn(f"step size {mu} is not below the ordering bound {bound:.6g}; "
                          f"utility ordering u1<u3<u2<u4 is not guaranteed", stacklevel=2)
    return U
