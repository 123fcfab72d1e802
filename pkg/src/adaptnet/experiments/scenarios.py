"""The four experiment families.

Every scenario writes its CSV files into ``out_dir`` and then builds
``summary.json`` by reading those files back, so every summary number can
be recomputed from the raw rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..combiners import CombinerRowError
from ..evo import theory
from ..evo.montecarlo import (FIXED_M, FIXED_R, evolve_with_snapshots, fixation_probability,
                              initial_strategies_from_fraction, simulate_runs, RULE_CODES)
from ..evo.payoff import UtilityMatrix2, utility_from_pi
from ..evo.state import PlacementError, evenly_spaced_placement
from ..metrics import tail_slope_db, to_db
from ..policies import resolve_policy
from ..signal_model import make_true_parameter
from ..topology import TopologyError, regular_circulant
from .config import ExperimentConfig, TopologyConfigError
from .ensemble import run_ensemble
from .identities import run_identity_suite
from .output import provenance_line, read_csv, write_csv, write_summary


@dataclass
class ScenarioResult:
    scenario: str
    files: list[Path]
    summary: dict[str, Any]
    passed: bool = True
    extras: dict[str, Any] = field(default_factory=dict, repr=False)


def _prov(cfg: ExperimentConfig) -> str:
    return provenance_line(cfg.digest(), cfg.seed)


def _f(row: dict[str, str], key: str) -> float:
    v = row[key]
    return float(v) if v != "" else math.nan


def _signal_constants(cfg: ExperimentConfig) -> tuple[float, float, float]:
    z = np.asarray(cfg.spectrum())
    return cfg.signal["step_size"], float(z.sum()), float(z @ z)


# ---------------------------------------------------------------- msd_compare

def run_msd_compare(cfg: ExperimentConfig, out_dir: Path) -> ScenarioResult:
    p = cfg.params
    topo = cfg.build_topology()
    profiles = cfg.build_profiles(topo.node_count)
    w0 = make_true_parameter(cfg.signal["dim"])
    curves = {}
    for name in p["algorithms"]:
        try:
            policy = resolve_policy(name, topo, profiles, lam_power=p["lambda_power"],
                                    lam_exp=p["lambda_exp"], nu=p["forgetting"],
                                    beta_floor=p["beta_floor"], inclusive=p["inclusive"])
        except CombinerRowError as exc:
            raise cfg.error("msd_compare", "algorithms",
                            f"{name} gives no valid combiner on {topo.name}: {exc}") from None
        # same seed and stream for every algorithm: identical data, paired comparison
        curves[name] = run_ensemble(topo, profiles, w0, policy, horizon=p["horizon"], runs=cfg.runs,
                                    seed=cfg.seed, steady_window=p["steady_window"],
                                    beta0=p["beta0"], mixing=p["mixing"])
    out_dir.mkdir(parents=True, exist_ok=True)
    prov = _prov(cfg)
    T = p["horizon"]

    def transient_rows():
        for name, lc in curves.items():
            e_se, m_se = lc.stderr("emse"), lc.stderr("msd")
            for t in range(T):
                yield (name, t, lc.emse[t], float(to_db(lc.emse[t])), e_se[t],
                       lc.msd[t], float(to_db(lc.msd[t])), m_se[t])

    def steady_rows():
        for name, lc in curves.items():
            for i in range(topo.node_count):
                e, m = lc.emse_steady_nodes[i], lc.msd_steady_nodes[i]
                yield name, i, e, float(to_db(e)), m, float(to_db(m))

    def run_rows():
        for name, lc in curves.items():
            e, m = lc.steady_per_run("emse"), lc.steady_per_run("msd")
            for r in range(lc.runs):
                yield name, r, e[r], m[r]

    files = [
        write_csv(out_dir / "transient.csv", ["algorithm", "t", "emse", "emse_db", "emse_stderr",
                                              "msd", "msd_db", "msd_stderr"], transient_rows(), prov),
        write_csv(out_dir / "steady.csv", ["algorithm", "node", "emse", "emse_db", "msd", "msd_db"],
                  steady_rows(), prov),
        write_csv(out_dir / "steady_runs.csv", ["algorithm", "run", "emse", "msd"], run_rows(), prov),
    ]
    summary = summarize_msd_compare(out_dir, p["steady_window"])
    summary.update(scenario="msd_compare", topology=topo.name, runs=cfg.runs, seed=cfg.seed)
    files.append(write_summary(out_dir / "summary.json", summary))
    return ScenarioResult("msd_compare", files, summary, extras={"curves": curves})


def summarize_msd_compare(out_dir: Path, steady_window: int) -> dict[str, Any]:
    _, transient = read_csv(out_dir / "transient.csv")
    _, runs = read_csv(out_dir / "steady_runs.csv")
    _, nodes = read_csv(out_dir / "steady.csv")
    algs: dict[str, Any] = {}
    for name in dict.fromkeys(r["algorithm"] for r in transient):
        msd_curve = np.array([_f(r, "msd") for r in transient if r["algorithm"] == name])
        e = np.array([_f(r, "emse") for r in runs if r["algorithm"] == name])
        m = np.array([_f(r, "msd") for r in runs if r["algorithm"] == name])
        node_e = np.array([_f(r, "emse") for r in nodes if r["algorithm"] == name])
        se = (lambda x: float(x.std(ddof=1) / np.sqrt(len(x))) if len(x) > 1 else math.nan)
        algs[name] = {
            "steady_emse": float(e.mean()), "steady_emse_stderr": se(e),
            "steady_emse_db": float(to_db(e.mean())),
            "steady_msd": float(m.mean()), "steady_msd_stderr": se(m),
            "steady_msd_db": float(to_db(m.mean())),
            "initial_msd_db": float(to_db(msd_curve[0])),
            "msd_drop_db": float(to_db(msd_curve[0]) - to_db(m.mean())),
            "tail_slope_db_per_step": tail_slope_db(msd_curve, min(steady_window, len(msd_curve))),
            "worst_node_emse_db": float(to_db(node_e.max())),
        }
    return {"algorithms": algs}


# ---------------------------------------------------------------- diffusion_sweep

def sweep_utilities(cfg: ExperimentConfig) -> tuple[dict[float, UtilityMatrix2], float]:
    """Utilities per sigma_m^2 and the divisor applied to all of them."""
    p = cfg.params
    mu, tr, z2 = _signal_constants(cfg)
    raw = {s: utility_from_pi(p["sigma_r2"], s, mu, tr, z2) for s in p["sigma_m2"]}
    if p["normalize"] == "none":
        return raw, 1.0
    if p["normalize"] == "point":
        return {s: U.normalized() for s, U in raw.items()}, math.nan
    # one divisor for the whole grid keeps the points comparable with each other
    top = max(max(U.as_tuple()) for U in raw.values())
    return {s: UtilityMatrix2(*(u / top for u in U.as_tuple())) for s, U in raw.items()}, float(top)


def sweep_graph(cfg: ExperimentConfig, n: int):
    N, offsets = cfg.params[f"graph_n{n}"]
    key = f"graph_n{n}"
    try:
        topo = regular_circulant(N, offsets)
    except TopologyError as exc:
        raise TopologyConfigError(f"{cfg.where('diffusion_sweep', key)}: [diffusion_sweep] "
                                  f"{key}: {exc}") from None
    if topo.max_degree - 1 != n or not topo.is_regular:
        raise TopologyConfigError(f"{cfg.where('diffusion_sweep', key)}: [diffusion_sweep] {key}: "
                                  f"offsets {offsets} give degree {topo.max_degree - 1}, not {n}")
    try:
        init = evenly_spaced_placement(topo, n)
    except PlacementError as exc:
        raise TopologyConfigError(f"{cfg.where('diffusion_sweep', key)}: [diffusion_sweep] "
                                  f"{key}: {exc}") from None
    return topo, init


def run_diffusion_sweep(cfg: ExperimentConfig, out_dir: Path) -> ScenarioResult:
    p = cfg.params
    utilities, divisor = sweep_utilities(cfg)
    graphs = {n: sweep_graph(cfg, n) for n in p["degrees"]}
    rows = []
    point = 0
    for n, (topo, init) in graphs.items():
        N = topo.node_count
        for alpha in p["alphas"]:
            for s2 in p["sigma_m2"]:
                U = utilities[s2]
                t1 = theory.theorem1_closed_form(n, N, alpha, U)
                H = theory.fixation_kolmogorov(n, N, alpha, U, 1.0 / (n + 1))
                for rule in p["rules"]:
                    est = fixation_probability(topo, U, alpha, runs=cfg.runs, seed=cfg.seed,
                                               init=init, rule=rule, step_limit=p["step_limit"],
                                               stream=point)
                    point += 1
                    rows.append((n, N, topo.name, alpha, s2, rule, *map(float, U.as_tuple()),
                                 divisor, est.runs, est.fixed, est.lost, est.censored,
                                 est.estimate, est.stderr, t1, H, int(0.0 <= t1 <= 1.0),
                                 est.mean_steps))
    out_dir.mkdir(parents=True, exist_ok=True)
    header = ["n", "N", "topology", "alpha", "sigma_m2", "rule", "u1", "u2", "u3", "u4",
              "utility_divisor", "runs", "fixed", "lost", "censored", "mc_estimate", "mc_stderr",
              "theorem1", "kolmogorov", "theorem1_in_range", "mean_steps"]
    files = [write_csv(out_dir / "sweep.csv", header, rows, _prov(cfg))]
    summary = summarize_diffusion_sweep(out_dir)
    summary.update(scenario="diffusion_sweep", seed=cfg.seed, normalize=p["normalize"])
    files.append(write_summary(out_dir / "summary.json", summary))
    return ScenarioResult("diffusion_sweep", files, summary)


def summarize_diffusion_sweep(out_dir: Path) -> dict[str, Any]:
    _, rows = read_csv(out_dir / "sweep.csv")
    groups: dict[str, list[dict[str, str]]] = {}
    for r in rows:
        groups.setdefault(f"n={r['n']} alpha={r['alpha']} rule={r['rule']}", []).append(r)
    out = {}
    for key, g in groups.items():
        g = sorted(g, key=lambda r: _f(r, "sigma_m2"))
        mc = [_f(r, "mc_estimate") for r in g]
        th = [_f(r, "theorem1") for r in g]
        out[key] = {
            "sigma_m2": [_f(r, "sigma_m2") for r in g],
            "mc_estimate": mc,
            "mc_stderr": [_f(r, "mc_stderr") for r in g],
            "theorem1": th,
            "max_abs_gap": float(max(abs(a - b) for a, b in zip(mc, th))),
            "mc_monotone_decreasing": bool(all(a > b for a, b in zip(mc, mc[1:]))),
            "theory_monotone_decreasing": bool(all(a > b for a, b in zip(th, th[1:]))),
            "censored": int(sum(int(r["censored"]) for r in g)),
        }
    return {"groups": out}


# ---------------------------------------------------------------- ess_grid

def ess_utilities(cfg: ExperimentConfig) -> UtilityMatrix2:
    p = cfg.params
    mu, tr, z2 = _signal_constants(cfg)
    U = utility_from_pi(p["sigma_r2"], p["sigma_m2"], mu, tr, z2)
    return U.normalized() if p["normalize"] == "point" else U


def run_ess_grid(cfg: ExperimentConfig, out_dir: Path) -> ScenarioResult:
    p = cfg.params
    topo = cfg.build_topology()
    if not topo.is_regular:
        raise TopologyConfigError(f"{cfg.where('topology', 'kind')}: [topology] ess_grid needs a "
                                  f"regular graph, got {topo.name}")
    n = topo.max_degree - 1
    U = ess_utilities(cfg)
    N = topo.node_count
    init = initial_strategies_from_fraction(N, 1.0 - p["share_m"], cfg.runs, cfg.seed)
    outcome, steps = simulate_runs(topo, U, p["alpha"], init, runs=cfg.runs, seed=cfg.seed,
                                   rule=p["rule"], step_limit=p["step_limit"])
    label = {FIXED_M: "r_extinct", FIXED_R: "m_extinct"}
    out_dir.mkdir(parents=True, exist_ok=True)
    prov = _prov(cfg)
    files = [write_csv(out_dir / "extinction.csv", ["run", "initial_r", "outcome", "steps"],
                       ((r, int(N - init[r].sum()), label.get(int(outcome[r]), "censored"),
                         int(steps[r])) for r in range(cfg.runs)), prov)]

    cols = cfg.topology["cols"] if cfg.topology["kind"] == "torus" else N
    snaps: list[tuple] = []
    for r in range(min(p["snapshot_runs"], cfg.runs)):
        def keep(step: int, s: np.ndarray, r=r) -> None:
            snaps.extend((r, step, i, i // cols, i % cols, int(s[i])) for i in range(N))
        evolve_with_snapshots(topo, U, p["alpha"], init[r], seed=cfg.seed, rule=p["rule"],
                              step_limit=p["step_limit"], every=p["snapshot_every"],
                              on_snapshot=keep, run=r)
    files.append(write_csv(out_dir / "snapshots.csv", ["run", "step", "node", "row", "col",
                                                       "strategy"], snaps, prov))

    rep_rows = []
    for rule in RULE_CODES:
        up = theory.u_prime(U, n, rule)
        path = theory.replicator_trajectory(U, up, p["p_r0"], p["replicator_steps"])
        keep_idx = sorted(set(range(0, len(path), p["replicator_every"])) | {len(path) - 1})
        rep_rows += [(rule, up, k, path[k, 0], path[k, 1]) for k in keep_idx]
    files.append(write_csv(out_dir / "replicator.csv", ["rule", "u_prime", "step", "p_r", "p_m"],
                           rep_rows, prov))
    summary = summarize_ess_grid(out_dir)
    summary.update(scenario="ess_grid", topology=topo.name, seed=cfg.seed, alpha=p["alpha"],
                   rule=p["rule"], utilities=[float(u) for u in U.as_tuple()],
                   ess_complete=theory.ess_complete(U).is_ess,
                   ess_regular={rule: theory.ess_regular(U, n, rule).is_ess for rule in RULE_CODES})
    files.append(write_summary(out_dir / "summary.json", summary))
    return ScenarioResult("ess_grid", files, summary)


def summarize_ess_grid(out_dir: Path) -> dict[str, Any]:
    _, ext = read_csv(out_dir / "extinction.csv")
    _, rep = read_csv(out_dir / "replicator.csv")
    runs = len(ext)
    extinct = [int(r["steps"]) for r in ext if r["outcome"] == "r_extinct"]
    final = {}
    for r in rep:
        final[r["rule"]] = _f(r, "p_r")   # rows are in step order, so the last one wins
    return {
        "runs": runs,
        "r_extinct": len(extinct),
        "m_extinct": sum(r["outcome"] == "m_extinct" for r in ext),
        "censored": sum(r["outcome"] == "censored" for r in ext),
        "extinction_fraction": len(extinct) / runs if runs else math.nan,
        "mean_extinction_step": float(np.mean(extinct)) if extinct else math.nan,
        "replicator_final_p_r": final,
    }


# ---------------------------------------------------------------- theory_check

def run_theory_check(cfg: ExperimentConfig, out_dir: Path) -> ScenarioResult:
    p = cfg.params
    mutation = None if p["mutate"] == "none" else p["mutate"]
    results = run_identity_suite(draws=p["draws"], n_max=p["degree_max"],
                                 topologies=p["topologies"], max_nodes=p["max_nodes"],
                                 seed=cfg.seed, mutation=mutation)
    n = p["degree"]
    flat = UtilityMatrix2(1.0, 1.0, 1.0, 1.0)
    neutral_gap = abs(theory.theorem1_closed_form(n, 10 * (n + 1), 0.05, flat) - 1.0 / (n + 1))
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = [(r.name, int(r.passed), r.max_deviation, r.tolerance, r.cases, r.detail)
            for r in results]
    rows.append((f"neutral_closed_form_n{n}", int(neutral_gap <= 1e-12), neutral_gap, 1e-12, 1,
                 f"equal utilities give 1/(n+1) at n={n}"))
    files = [write_csv(out_dir / "identities.csv", ["identity", "passed", "max_deviation",
                                                    "tolerance", "cases", "detail"],
                       rows, _prov(cfg))]
    summary = summarize_theory_check(out_dir)
    summary.update(scenario="theory_check", seed=cfg.seed, mutation=p["mutate"])
    files.append(write_summary(out_dir / "summary.json", summary))
    return ScenarioResult("theory_check", files, summary, passed=summary["all_passed"])


def summarize_theory_check(out_dir: Path) -> dict[str, Any]:
    _, rows = read_csv(out_dir / "identities.csv")
    return {
        "identities": {r["identity"]: {"passed": r["passed"] == "1",
                                       "max_deviation": _f(r, "max_deviation")} for r in rows},
        "all_passed": all(r["passed"] == "1" for r in rows),
    }


SCENARIOS = {
    "msd_compare": run_msd_compare,
    "diffusion_sweep": run_diffusion_sweep,
    "ess_grid": run_ess_grid,
    "theory_check": run_theory_check,
}


def run_scenario(cfg: ExperimentConfig, out_dir: Path) -> ScenarioResult:
    return SCENARIOS[cfg.scenario](cfg, Path(out_dir))
