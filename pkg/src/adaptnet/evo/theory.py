"""Weak-selection theory of strategy diffusion on degree-n regular graphs.

Covers the pair-approximation dynamics of (p_m, q_m|m), the slow manifold,
the diffusion-approximation fixation probability, and evolutionary stability
on complete and regular graphs.  Every function takes utilities as a
:class:`UtilityMatrix2` (or anything with ``u1..u4``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .payoff import UtilityMatrix2


def _need_pair_degree(n: int) -> None:
    if n < 3:
        raise ValueError(f"pair approximation needs degree n >= 3, got {n}")


# ---------------------------------------------------------------- local fitness

@dataclass(frozen=True)
class LocalFitness:
    f0: float
    f_m: float
    f_r: float
    g0: float
    g_m: float
    g_r: float


def local_fitnesses(n: int, n_r: int, n_m: int, q_rm: float, q_mm: float, q_rr: float,
                    q_mr: float, U: UtilityMatrix2, alpha: float) -> LocalFitness:
    """Fitness around a focal node with n_r S_r and n_m S_m neighbors.

    f-values belong to an S_r focal node and its neighbors, g-values to an
    S_m focal node and its neighbors; the baseline fitness is 1.
    """
    if n_r + n_m != n:
        raise ValueError(f"n_r + n_m must equal n ({n_r} + {n_m} != {n})")
    u1, u2, u3, u4 = U.u1, U.u2, U.u3, U.u4
    b = 1.0 - alpha
    return LocalFitness(
        f0=b + alpha * (n_r * u1 + n_m * u2),
        f_m=b + alpha * (((n - 1) * q_rm + 1) * u3 + (n - 1) * q_mm * u4),
        f_r=b + alpha * (((n - 1) * q_rr + 1) * u1 + (n - 1) * q_mr * u2),
        g0=b + alpha * (n_r * u2 + n_m * u3),
        g_m=b + alpha * ((n - 1) * q_rm * u3 + ((n - 1) * q_mm + 1) * u4),
        g_r=b + alpha * ((n - 1) * q_rr * u1 + ((n - 1) * q_mr + 1) * u2),
    )


# ---------------------------------------------------------------- pair dynamics

def slow_manifold_conditionals(p_m: float, n: int) -> tuple[float, float, float, float]:
    """(q_m|m, q_m|r, q_r|m, q_r|r) once edge statistics have relaxed."""
    if n < 2:
        raise ValueError(f"degree must be >= 2, got {n}")
    if not 0.0 <= p_m <= 1.0:
        raise ValueError(f"p_m must lie in [0, 1], got {p_m}")
    k = (n - 2) / (n - 1)
    return p_m + (1.0 - p_m) / (n - 1), k * p_m, k * (1.0 - p_m), 1.0 - k * p_m


def gamma_coeffs(q_mm: float, q_mr: float, q_rm: float, q_rr: float, n: int) -> np.ndarray:
    s = (n - 1) * (q_rr + q_mm)
    return np.array([
        -q_rr * (s + 3),
        -q_mm - q_mr * (s + 2) - 2.0 / (n - 1),
        q_rr + q_rm * (s + 2) + 2.0 / (n - 1),
        q_mm * (s + 3),
    ])


def pair_dynamics_rhs(p_m: float, q_mm: float, n: int, N: int, U: UtilityMatrix2,
                      alpha: float) -> tuple[float, float]:
    """Leading-order (dp_m/dt, dq_m|m/dt) under the IM rule.

    Both derivatives are zero at the absorbing states p_m = 0 and p_m = 1.
    """
    if n <= 1:
        raise ValueError(f"degree must be > 1, got {n}")
    if not 0.0 <= p_m <= 1.0 or not 0.0 <= q_mm <= 1.0:
        raise ValueError(f"p_m={p_m} and q_mm={q_mm} must lie in [0, 1]")
    if p_m in (0.0, 1.0):
        return 0.0, 0.0
    q_rm = 1.0 - q_mm
    p_rm = p_m * q_rm
    q_mr = p_rm / (1.0 - p_m)
    if q_mr > 1.0 + 1e-12:
        raise ValueError(f"inconsistent state: q_mr = {q_mr} > 1")
    q_rr = 1.0 - q_mr
    gam = gamma_coeffs(q_mm, q_mr, q_rm, q_rr, n)
    dp = alpha * n * (n - 1) * p_rm / (N * (n + 1) ** 2) * float(gam @ np.array(U.as_tuple()))
    dq = 2.0 / ((n + 1) * N) * q_rm * (1.0 + (n - 1) * (q_mr - q_mm))
    return dp, dq


# ---------------------------------------------------------------- fixation

def xi_coeffs(n: int) -> tuple[float, float, float, float]:
    return (-2 * n * n - 5 * n + 3, -n * n - n - 3, 2 * n * n + 2 * n - 3, n * n + 4 * n + 3)


def appendix_coeffs(n: int, U: UtilityMatrix2) -> tuple[float, float]:
    """Coefficients (a, b) of the drift p(1-p)(a p + b); a + 3b > 0 favors S_m."""
    _need_pair_degree(n)
    u1, u2, u3, u4 = U.as_tuple()
    a = (n - 2) * (n + 3) * (u1 - u2 - u3 + u4)
    b = -(n - 1) * (n + 3) * u1 - 3 * u2 + (n * n + n - 3) * u3 + (n + 3) * u4
    return a, b


def theorem1_closed_form(n: int, N: int, alpha: float, U: UtilityMatrix2) -> float:
    """Diffusion probability of S_m from the worst-case start p_m0 = 1/(n+1).

    First order in the selection intensity; not clamped to [0, 1].
    """
    _need_pair_degree(n)
    if N < n + 1:
        raise ValueError(f"N={N} cannot host a degree-{n} regular graph")
    xi = np.array(xi_coeffs(n), dtype=float)
    return 1.0 / (n + 1) + alpha * n * N / (6.0 * (n + 1) ** 3) * float(xi @ np.array(U.as_tuple()))


def drift(p_m: float, n: int, alpha: float, U: UtilityMatrix2) -> float:
    """Mean increment of p_m per unit time, in units of 1/N, on the slow manifold."""
    a, b = appendix_coeffs(n, U)
    return alpha * n * (n - 2) / ((n - 1) * (n + 1) ** 2) * p_m * (1 - p_m) * (a * p_m + b)


def diffusion_variance(p_m: float, n: int, N: int) -> float:
    """Variance of the increment of p_m per unit time, to zeroth order in selection."""
    return 2.0 / N * n * (n - 2) / ((n - 1) * (n + 1)) * p_m * (1 - p_m)


def fixation_kolmogorov(n: int, N: int, alpha: float, U: UtilityMatrix2, p_m0: float) -> float:
    """First-order solution H(p_m0) of the backward Kolmogorov equation."""
    if not 0.0 <= p_m0 <= 1.0:
        raise ValueError(f"p_m0 must lie in [0, 1], got {p_m0}")
    a, b = appendix_coeffs(n, U)
    return p_m0 + alpha * N / (6.0 * (n + 1)) * p_m0 * (1 - p_m0) * ((a + 3 * b) + a * p_m0)


# ---------------------------------------------------------------- stability

@dataclass(frozen=True)
class EssVerdict:
    is_ess: bool
    clause: str | None
    u_prime: float = 0.0
    boundary: bool = False


def ess_complete(U: UtilityMatrix2) -> EssVerdict:
    """S_m is stable when u4 > u2, or u4 = u2 and u3 > u1."""
    if U.u4 > U.u2:
        return EssVerdict(True, "u4>u2")
    if U.u4 == U.u2 and U.u3 > U.u1:
        return EssVerdict(True, "u4=u2,u3>u1", boundary=True)
    return EssVerdict(False, None, boundary=U.u4 == U.u2)


def u_prime(U: UtilityMatrix2, n: int, rule: str) -> float:
    """Pair-approximation payoff shift for the IM, BD or DB update rule."""
    _need_pair_degree(n)
    u1, u2, u3, u4 = U.as_tuple()
    rule = rule.upper()
    if rule == "IM":
        return ((n + 3) * u1 + u2 - u3 - (n + 3) * u4) / ((n + 3) * (n - 2))
    if rule == "BD":
        return ((n + 1) * u1 + u2 - u3 - (n + 1) * u4) / ((n + 1) * (n - 2))
    if rule == "DB":
        return (u1 + u2 - u3 - u4) / (n - 2)
    raise ValueError(f"unknown update rule {rule!r}")


def shifted_utilities(U: UtilityMatrix2, up: float) -> UtilityMatrix2:
    return UtilityMatrix2(U.u1, U.u2 + up, U.u3 - up, U.u4)


def ess_regular(U: UtilityMatrix2, n: int, rule: str) -> EssVerdict:
    up = u_prime(U, n, rule)
    v = ess_complete(shifted_utilities(U, up))
    return EssVerdict(v.is_ess, v.clause, up, v.boundary)


def replicator_trajectory(U: UtilityMatrix2, up: float, p_r0: float, steps: int,
                          dt: float = 1e-3) -> np.ndarray:
    """Explicit Euler path of (p_r, p_m) under the shifted-payoff replicator dynamics.

    Returns an array of shape (steps + 1, 2).
    """
    if not 0.0 <= p_r0 <= 1.0:
        raise ValueError(f"p_r0 must lie in [0, 1], got {p_r0}")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    V = shifted_utilities(U, up).as_array()
    out = np.empty((steps + 1, 2))
    p = np.array([p_r0, 1.0 - p_r0])
    out[0] = p
    for k in range(1, steps + 1):
        f = V @ p
        phi = p @ f
        p = np.clip(p + dt * p * (f - phi), 0.0, None)
        p /= p.sum()
        out[k] = p
    return out
