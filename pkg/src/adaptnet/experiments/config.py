"""INI experiment configuration with line-precise validation errors.

Sections: ``[experiment]`` (scenario, seed, runs, threads), ``[topology]``,
``[signal]`` and one section named after the scenario.  The full schema is
in docs/config-schema.md.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from ..policies import is_valid_policy_name
from ..signal_model import NodeProfile
from ..topology import Topology, complete_graph, grid_torus, random_geometric, regular_circulant

SCENARIOS = ("msd_compare", "diffusion_sweep", "ess_grid", "theory_check")

DEFAULT_ROSTER = ("uniform", "max_degree", "laplacian", "rel_degree", "rel_degree_var",
                  "metropolis", "error_aware_pow", "error_aware_exp",
                  "egt_bd:rel_degree_var", "egt_db:rel_degree_var",
                  "egt_bd:error_pow", "egt_db:error_pow")

# triangle-free circulants whose every-(n+1)-th placement gives each S_r node one S_m neighbor
DEFAULT_SWEEP_GRAPHS = {3: (100, (1, 50)), 4: (100, (1, 3)), 6: (98, (1, 3, 9))}


class ConfigError(ValueError):
    """Invalid configuration; the message names the file and line when known."""


# ---------------------------------------------------------------- value parsers

def _int(s: str) -> int:
    return int(s.strip())


def _float(s: str) -> float:
    return float(s.strip())


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _list(item: Callable[[str], Any]) -> Callable[[str], tuple]:
    def parse(s: str) -> tuple:
        parts = [p for p in re.split(r"[,\s]+", s.strip()) if p]
        if not parts:
            raise ValueError("expected a non-empty list")
        return tuple(item(p) for p in parts)
    return parse


def _str(s: str) -> str:
    return s.strip()


def _choice(*options: str) -> Callable[[str], str]:
    def parse(s: str) -> str:
        v = s.strip()
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {v!r}")
        return v
    return parse


def _optional_float(s: str) -> float | None:
    return None if s.strip().lower() in ("", "none") else float(s)


def _graph(s: str) -> tuple[int, tuple[int, ...]]:
    # "N: o1, o2, ..."
    head, sep, tail = s.partition(":")
    if not sep:
        raise ValueError(f"expected 'N: offset, offset, ...', got {s!r}")
    return int(head), _list(_int)(tail)


# ---------------------------------------------------------------- schema

Key = tuple[Callable[[str], Any], Any]   # (parser, default); default REQUIRED means mandatory
REQUIRED = object()

SCHEMA: dict[str, dict[str, Key]] = {
    "experiment": {
        "scenario": (_choice(*SCENARIOS), REQUIRED),
        "seed": (_int, REQUIRED),
        "runs": (_int, None),
        "threads": (_int, None),
    },
    "topology": {
        "kind": (_choice("geometric", "circulant", "torus", "complete", "edgelist"), "geometric"),
        "nodes": (_int, 20),
        "radius": (_float, 0.4),
        "topology_seed": (_int, None),
        "offsets": (_list(_int), (1, 2)),
        "rows": (_int, 10),
        "cols": (_int, 10),
        "path": (_str, None),
    },
    "signal": {
        "dim": (_int, 5),
        "step_size": (_float, 0.01),
        "step_sizes": (_list(_float), None),
        "spectrum": (_list(_float), None),
        "noise_variances": (_list(_float), None),
        "noise_min": (_float, 0.2),
        "noise_max": (_float, 1.5),
    },
    "msd_compare": {
        "algorithms": (_list(_str), DEFAULT_ROSTER),
        "horizon": (_int, 1000),
        "steady_window": (_int, 100),
        "lambda_power": (_float, 2.0),
        "lambda_exp": (_float, 1.0),
        "forgetting": (_float, 0.05),
        "beta0": (_float, 1.0),
        "beta_floor": (_optional_float, None),
        "inclusive": (_bool, True),
        "mixing": (_choice("deterministic", "random"), "deterministic"),
    },
    "diffusion_sweep": {
        "degrees": (_list(_int), (4,)),
        "graph_n3": (_graph, DEFAULT_SWEEP_GRAPHS[3]),
        "graph_n4": (_graph, DEFAULT_SWEEP_GRAPHS[4]),
        "graph_n6": (_graph, DEFAULT_SWEEP_GRAPHS[6]),
        "alphas": (_list(_float), (0.01,)),
        "sigma_r2": (_float, 1.5),
        "sigma_m2": (_list(_float), (0.2, 0.35, 0.5, 0.65, 0.8)),
        "rules": (_list(_choice("IM", "BD", "DB")), ("IM",)),
        "step_limit": (_int, 10_000_000),
        "normalize": (_choice("sweep", "point", "none"), "sweep"),
    },
    "ess_grid": {
        "share_m": (_float, 0.95),
        "alpha": (_float, 0.01),
        "sigma_r2": (_float, 1.5),
        "sigma_m2": (_float, 0.5),
        "rule": (_choice("IM", "BD", "DB"), "IM"),
        "step_limit": (_int, 10_000_000),
        "snapshot_every": (_int, 1000),
        "snapshot_runs": (_int, 1),
        "p_r0": (_float, 0.1),
        "replicator_steps": (_int, 20000),
        "replicator_every": (_int, 100),
        "normalize": (_choice("point", "none"), "point"),
    },
    "theory_check": {
        "draws": (_int, 1000),
        "degree_max": (_int, 200),
        "degree": (_int, 4),
        "topologies": (_int, 100),
        "max_nodes": (_int, 30),
        "mutate": (_choice("none", "xi2"), "none"),
    },
}

DEFAULT_RUNS = {"msd_compare": 500, "diffusion_sweep": 10_000, "ess_grid": 200, "theory_check": 1}


@dataclass
class ExperimentConfig:
    scenario: str
    seed: int
    runs: int
    threads: int | None
    topology: dict[str, Any]
    signal: dict[str, Any]
    params: dict[str, Any]
    path: str = "<memory>"
    lines: dict[tuple[str, str], int] = field(default_factory=dict, repr=False)

    def where(self, section: str, key: str) -> str:
        line = self.lines.get((section, key))
        return f"{self.path}:{line}" if line else self.path

    def error(self, section: str, key: str, msg: str) -> ConfigError:
        return ConfigError(f"{self.where(section, key)}: [{section}] {key}: {msg}")

    def as_dict(self) -> dict[str, Any]:
        return {"scenario": self.scenario, "seed": self.seed, "runs": self.runs,
                "topology": self.topology, "signal": self.signal, "params": self.params}

    def digest(self) -> str:
        """SHA-256 of the resolved settings (after defaults and CLI overrides)."""
        blob = json.dumps(self.as_dict(), sort_keys=True, default=list)
        return hashlib.sha256(blob.encode()).hexdigest()

    # ---- builders used by the scenarios

    def build_topology(self) -> Topology:
        t = self.topology
        kind = t["kind"]
        try:
            if kind == "geometric":
                seed = self.seed if t["topology_seed"] is None else t["topology_seed"]
                return random_geometric(t["nodes"], t["radius"], seed=seed)
            if kind == "circulant":
                return regular_circulant(t["nodes"], t["offsets"])
            if kind == "torus":
                return grid_torus(t["rows"], t["cols"])
            if kind == "complete":
                return complete_graph(t["nodes"])
            if t["path"] is None:
                raise ValueError("edgelist topology needs a path")
            return Topology.read_edgelist(Path(self.path).parent / t["path"])
        except ValueError as exc:
            raise TopologyConfigError(f"{self.where('topology', 'kind')}: [topology] {exc}") from exc

    def spectrum(self) -> tuple[float, ...]:
        s = self.signal
        return s["spectrum"] if s["spectrum"] is not None else (2.0,) * s["dim"]

    def build_profiles(self, N: int) -> list[NodeProfile]:
        s = self.signal
        if s["noise_variances"] is not None:
            if len(s["noise_variances"]) != N:
                raise self.error("signal", "noise_variances",
                                 f"{len(s['noise_variances'])} values for {N} nodes")
            noise = np.asarray(s["noise_variances"])
        else:
            noise = np.linspace(s["noise_min"], s["noise_max"], N)
        if s["step_sizes"] is not None:
            if len(s["step_sizes"]) != N:
                raise self.error("signal", "step_sizes", f"{len(s['step_sizes'])} values for {N} nodes")
            mu = [float(m) for m in s["step_sizes"]]
        else:
            mu = [s["step_size"]] * N
        try:
            return [NodeProfile(float(v), m, self.spectrum()) for v, m in zip(noise, mu)]
        except ValueError as exc:
            raise self.error("signal", "noise_variances", str(exc)) from None


class TopologyConfigError(ConfigError):
    """The configured topology or placement cannot be built."""


def _line_map(text: str) -> dict[tuple[str, str], int]:
    out: dict[tuple[str, str], int] = {}
    section = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = re.fullmatch(r"\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            out[(section, "")] = no
            continue
        key = re.split(r"[=:]", line, maxsplit=1)[0].strip().lower()
        if section is not None and key:
            out[(section, key)] = no
    return out


def parse_config(text: str, path: str = "<memory>", *, seed: int | None = None,
                 runs: int | None = None, threads: int | None = None) -> ExperimentConfig:
    """Parse and validate config text; keyword arguments override file values."""
    lines = _line_map(text)
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=path)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(f"{path}:{line}: {exc.message}" if line else f"{path}: {exc}") from None

    def where(section: str, key: str = "") -> str:
        line = lines.get((section, key))
        return f"{path}:{line}" if line else path

    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"{where(section)}: unknown section [{section}]; "
                              f"expected one of {', '.join(SCHEMA)}")
        for key in parser[section]:
            if key not in SCHEMA[section]:
                raise ConfigError(f"{where(section, key)}: [{section}] unknown key {key!r}")
    if "experiment" not in parser:
        raise ConfigError(f"{path}: missing [experiment] section")

    def section_values(section: str) -> dict[str, Any]:
        values = {}
        raw = parser[section] if section in parser else {}
        for key, (parse, default) in SCHEMA[section].items():
            if key in raw:
                try:
                    values[key] = parse(raw[key])
                except ValueError as exc:
                    raise ConfigError(f"{where(section, key)}: [{section}] {key}: {exc}") from None
            elif default is REQUIRED:
                raise ConfigError(f"{where(section)}: [{section}] missing required key {key!r}")
            else:
                values[key] = default
        return values

    exp = section_values("experiment")
    scenario = exp["scenario"]
    if seed is not None:
        exp["seed"] = seed
    if runs is not None:
        exp["runs"] = runs
    if threads is not None:
        exp["threads"] = threads
    if exp["runs"] is None:
        exp["runs"] = DEFAULT_RUNS[scenario]
    cfg = ExperimentConfig(scenario, exp["seed"], exp["runs"], exp["threads"],
                           section_values("topology"), section_values("signal"),
                           section_values(scenario), path, lines)
    _validate(cfg)
    return cfg


def load_config(path: str | Path, **overrides) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"{p}: cannot read config ({exc.strerror})") from None
    return parse_config(text, str(p), **overrides)


def _validate(cfg: ExperimentConfig) -> None:
    if not 0 <= cfg.seed < 2 ** 64:
        raise cfg.error("experiment", "seed", f"must be an unsigned 64-bit integer, got {cfg.seed}")
    if cfg.runs < 1:
        raise cfg.error("experiment", "runs", f"must be >= 1, got {cfg.runs}")
    if cfg.threads is not None and cfg.threads < 1:
        raise cfg.error("experiment", "threads", f"must be >= 1, got {cfg.threads}")
    s = cfg.signal
    if s["dim"] < 1:
        raise cfg.error("signal", "dim", f"must be >= 1, got {s['dim']}")
    if s["spectrum"] is not None and len(s["spectrum"]) != s["dim"]:
        raise cfg.error("signal", "spectrum", f"{len(s['spectrum'])} values for dim {s['dim']}")
    if not 0 <= s["noise_min"] <= s["noise_max"]:
        raise cfg.error("signal", "noise_min", "need 0 <= noise_min <= noise_max")
    p = cfg.params
    sc = cfg.scenario
    if sc == "msd_compare":
        for name in p["algorithms"]:
            if not is_valid_policy_name(name):
                raise cfg.error(sc, "algorithms", f"unknown algorithm {name!r}")
        if p["horizon"] < 1:
            raise cfg.error(sc, "horizon", "must be >= 1")
        if not 1 <= p["steady_window"] <= p["horizon"]:
            raise cfg.error(sc, "steady_window", "must lie in 1..horizon")
        if not 0 < p["forgetting"] <= 1:
            raise cfg.error(sc, "forgetting", "must lie in (0, 1]")
        for key in ("lambda_power", "lambda_exp"):
            if p[key] <= 0:
                raise cfg.error(sc, key, "must be positive")
    elif sc == "diffusion_sweep":
        for n in p["degrees"]:
            if n < 3:
                raise cfg.error(sc, "degrees", f"degree {n} < 3; pair approximation needs n >= 3")
            if f"graph_n{n}" not in p:
                raise cfg.error(sc, "degrees", f"no graph_n{n} circulant available")
        for a in p["alphas"]:
            if not 0 <= a <= 1:
                raise cfg.error(sc, "alphas", f"selection intensity {a} outside [0, 1]")
        for v in p["sigma_m2"]:
            if not 0 < v < p["sigma_r2"]:
                raise cfg.error(sc, "sigma_m2", f"{v} must lie in (0, sigma_r2)")
    elif sc == "ess_grid":
        if not 0 <= p["share_m"] <= 1:
            raise cfg.error(sc, "share_m", "must lie in [0, 1]")
        if not 0 < p["sigma_m2"] < p["sigma_r2"]:
            raise cfg.error(sc, "sigma_m2", "must lie in (0, sigma_r2)")
        if p["snapshot_every"] < 1:
            raise cfg.error(sc, "snapshot_every", "must be >= 1")
    elif sc == "theory_check":
        if p["degree"] < 3:
            raise cfg.error(sc, "degree", f"degree {p['degree']} < 3; pair approximation needs n >= 3")
        if p["degree_max"] < 3:
            raise cfg.error(sc, "degree_max", "must be >= 3")
