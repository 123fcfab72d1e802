"""Batched Monte Carlo runs of diffusion LMS for one combiner policy."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..adaptation import NetworkState, network_step
from ..metrics import LearningCurve, emse, msd
from ..policies import StaticPolicy
from ..signal_model import NodeProfile, SignalSource
from ..topology import Topology


def run_ensemble(topology: Topology, profiles: Sequence[NodeProfile], w0: np.ndarray, policy, *,
                 horizon: int, runs: int, seed: int, steady_window: int, beta0: float = 1.0,
                 mixing: str = "deterministic", stream: int = 0) -> LearningCurve:
    """Advance ``runs`` independent networks for ``horizon`` steps in lockstep.

    The data stream depends only on (seed, stream), never on the policy, so
    policies run with the same arguments see identical regressors and noise.
    EMSE at step t uses the estimate held before the step's data arrives.
    """
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    if not 1 <= steady_window <= horizon:
        raise ValueError(f"steady window {steady_window} outside horizon {horizon}")
    N, M = topology.node_count, len(w0)
    source = SignalSource(profiles, w0, seed, runs=runs, stream=stream)
    mix_rng = np.random.default_rng([int(seed), int(stream), 1 << 20])
    state = NetworkState.initial(N, M, runs, beta0)
    msd_runs = np.empty((runs, horizon + 1))
    emse_runs = np.empty((runs, horizon))
    msd_tail = np.zeros(N)
    emse_tail = np.zeros(N)
    msd_runs[:, 0] = msd(state.estimates, w0).mean(axis=-1)
    static = isinstance(policy, StaticPolicy)
    tail_start = horizon - steady_window
    for t in range(horizon):
        u, d = source.draw()
        e = emse(state.estimates, w0, u)
        state = network_step(state, topology, profiles, policy, (u, d), mixing=mixing,
                             rng=mix_rng, check=not static or t == 0)
        m = msd(state.estimates, w0)
        msd_runs[:, t + 1] = m.mean(axis=-1)
        emse_runs[:, t] = e.mean(axis=-1)
        if t >= tail_start:
            msd_tail += m.mean(axis=0)
            emse_tail += e.mean(axis=0)
    return LearningCurve(msd_runs, emse_runs, msd_tail / steady_window,
                         emse_tail / steady_window, steady_window)
