"""Mean-square deviation and excess mean-square error, with ensemble averaging."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def msd(w: np.ndarray, w0: np.ndarray) -> np.ndarray:
    """||w - w0||^2 over the last axis."""
    e = np.asarray(w) - w0
    return np.sum(e * e, axis=-1)


def emse(w_prev: np.ndarray, w0: np.ndarray, u: np.ndarray) -> np.ndarray:
    """|u (w_prev - w0)|^2 over the last axis."""
    a = np.sum(np.asarray(u) * (np.asarray(w_prev) - w0), axis=-1)
    return a * a


def to_db(x: np.ndarray | float) -> np.ndarray:
    return 10.0 * np.log10(x)


def aggregate(curves: np.ndarray, steady_window: int) -> tuple[np.ndarray, np.ndarray]:
    """Reduce per-run, per-time, per-node values of shape (R, T, N).

    Returns the network transient (mean over runs and nodes at each t) and
    the per-node steady-state value (mean over runs and the last
    ``steady_window`` time steps).
    """
    c = np.asarray(curves, dtype=float)
    if c.ndim != 3 or c.shape[0] == 0:
        raise ValueError(f"expected a non-empty (runs, time, nodes) array, got shape {c.shape}")
    if not 1 <= steady_window <= c.shape[1]:
        raise ValueError(f"steady window {steady_window} outside horizon {c.shape[1]}")
    return c.mean(axis=(0, 2)), c[:, -steady_window:, :].mean(axis=(0, 1))


def tail_slope_db(curve: np.ndarray, window: int) -> float:
    """Least-squares slope, in dB per step, of the last ``window`` points."""
    tail = to_db(np.asarray(curve)[-window:])
    return float(np.polyfit(np.arange(len(tail)), tail, 1)[0])


@dataclass
class LearningCurve:
    """Ensemble statistics of one algorithm.

    ``*_runs`` arrays hold the network average (over nodes) per run and time
    step, shape (R, T+1) for MSD (index 0 is the initial state) and (R, T) for
    EMSE.  ``*_steady_nodes`` are the per-node steady-state means.
    """

    msd_runs: np.ndarray
    emse_runs: np.ndarray
    msd_steady_nodes: np.ndarray
    emse_steady_nodes: np.ndarray
    steady_window: int

    @property
    def runs(self) -> int:
        return self.msd_runs.shape[0]

    @property
    def msd(self) -> np.ndarray:
        return self.msd_runs.mean(axis=0)

    @property
    def emse(self) -> np.ndarray:
        return self.emse_runs.mean(axis=0)

    def stderr(self, which: str = "msd") -> np.ndarray:
        runs = self.msd_runs if which == "msd" else self.emse_runs
        if runs.shape[0] < 2:
            return np.full(runs.shape[1], np.nan)
        return runs.std(axis=0, ddof=1) / np.sqrt(runs.shape[0])

    def steady_per_run(self, which: str = "emse") -> np.ndarray:
        runs = self.msd_runs if which == "msd" else self.emse_runs
        return runs[:, -self.steady_window:].mean(axis=1)

    def steady(self, which: str = "emse") -> tuple[float, float]:
        """Network steady-state mean and its ensemble standard error."""
        per_run = self.steady_per_run(which)
        se = per_run.std(ddof=1) / np.sqrt(len(per_run)) if len(per_run) > 1 else float("nan")
        return float(per_run.mean()), float(se)
