import json

import numpy as np
import pytest

from adaptnet import __version__
from adaptnet.cli import EXIT_CONFIG, EXIT_IDENTITY, EXIT_OK, EXIT_TOPOLOGY, main
from adaptnet.experiments.config import parse_config
from adaptnet.experiments.output import read_csv
from adaptnet.experiments.scenarios import run_scenario

MSD = """\
[experiment]
scenario = msd_compare
seed = 5
runs = 4

[topology]
kind = geometric
nodes = 10
radius = 0.5

[msd_compare]
algorithms = uniform, rel_degree_var, error_aware_pow, egt_db:error_exp
horizon = 60
steady_window = 10
"""

SWEEP = """\
[experiment]
scenario = diffusion_sweep
seed = 3
runs = 300

[diffusion_sweep]
degrees = 4
graph_n4 = 20: 1, 3
alphas = 0.0, 0.01
sigma_m2 = 0.2, 0.8
rules = IM, DB
"""

ESS = """\
[experiment]
scenario = ess_grid
seed = 4
runs = 5

[topology]
kind = torus
rows = 4
cols = 4

[ess_grid]
share_m = 0.75
alpha = 0.2
snapshot_every = 10
snapshot_runs = 2
replicator_steps = 500
replicator_every = 50
"""

THEORY = """\
[experiment]
scenario = theory_check
seed = 0

[theory_check]
draws = 50
degree_max = 30
topologies = 10
max_nodes = 12
"""


def _write(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _run(tmp_path, scenario, text, out="out", extra=()):
    cfg = _write(tmp_path, text)
    return main([scenario, "--config", cfg, "--out", str(tmp_path / out), *extra])


@pytest.mark.parametrize("scenario,text,files", [
    ("msd_compare", MSD, ["transient.csv", "steady.csv", "steady_runs.csv"]),
    ("diffusion_sweep", SWEEP, ["sweep.csv"]),
    ("ess_grid", ESS, ["extinction.csv", "snapshots.csv", "replicator.csv"]),
    ("theory_check", THEORY, ["identities.csv"]),
])
def test_byte_identical_reruns_and_provenance(tmp_path, capsys, scenario, text, files):
    assert _run(tmp_path, scenario, text, "a") == EXIT_OK
    assert _run(tmp_path, scenario, text, "b") == EXIT_OK
    digest = parse_config(text).digest()
    for f in files + ["summary.json"]:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    for f in files:
        prov, rows = read_csv(tmp_path / "a" / f)
        seed = parse_config(text).seed
        assert prov == f"# adaptnet {__version__} config_sha256={digest} seed={seed}"
        assert rows
    printed = json.loads(capsys.readouterr().out.split("\n}\n")[0] + "\n}")
    assert printed["scenario"] == scenario


def test_seed_override_changes_output(tmp_path):
    assert _run(tmp_path, "msd_compare", MSD, "a") == EXIT_OK
    assert _run(tmp_path, "msd_compare", MSD, "b", ["--seed", "6"]) == EXIT_OK
    assert (tmp_path / "a/transient.csv").read_bytes() != (tmp_path / "b/transient.csv").read_bytes()


def test_msd_summary_recomputes_from_csv(tmp_path):
    res = run_scenario(parse_config(MSD), tmp_path)
    _, runs = read_csv(tmp_path / "steady_runs.csv")
    _, trans = read_csv(tmp_path / "transient.csv")
    for name, s in res.summary["algorithms"].items():
        e = np.array([float(r["emse"]) for r in runs if r["algorithm"] == name])
        assert s["steady_emse"] == float(e.mean())
        m0 = next(float(r["msd"]) for r in trans if r["algorithm"] == name and r["t"] == "0")
        assert s["initial_msd_db"] == float(10 * np.log10(m0))
        lc = res.extras["curves"][name]
        assert s["steady_emse"] == pytest.approx(lc.steady("emse")[0], rel=1e-12)
    assert json.loads((tmp_path / "summary.json").read_text())["algorithms"] == res.summary["algorithms"]


def test_msd_smoke_single_run(tmp_path):
    assert _run(tmp_path, "msd_compare", MSD, extra=["--runs", "1"]) == EXIT_OK
    _, rows = read_csv(tmp_path / "out/transient.csv")
    assert len(rows) == 4 * 60 and rows[0]["emse_stderr"] == "nan"
    assert (tmp_path / "out/steady.csv").exists()


def test_sweep_rows_and_neutral_rows(tmp_path):
    res = run_scenario(parse_config(SWEEP), tmp_path)
    _, rows = read_csv(tmp_path / "sweep.csv")
    assert len(rows) == 2 * 2 * 2
    for r in rows:
        assert int(r["fixed"]) + int(r["lost"]) + int(r["censored"]) == 300
        assert float(r["mc_estimate"]) == int(r["fixed"]) / 300
        if float(r["alpha"]) == 0.0:
            assert float(r["theorem1"]) == 0.2
            assert abs(float(r["mc_estimate"]) - 0.2) < 4 * float(r["mc_stderr"])
    grp = res.summary["groups"]["n=4 alpha=0.01 rule=IM"]
    assert grp["theory_monotone_decreasing"]
    mine = [float(r["mc_estimate"]) for r in rows if r["alpha"] == "0.01" and r["rule"] == "IM"]
    assert grp["mc_estimate"] == mine


def test_ess_outputs(tmp_path):
    res = run_scenario(parse_config(ESS), tmp_path)
    _, ext = read_csv(tmp_path / "extinction.csv")
    assert [int(r["initial_r"]) for r in ext] == [4] * 5
    assert res.summary["r_extinct"] + res.summary["m_extinct"] + res.summary["censored"] == 5
    _, snaps = read_csv(tmp_path / "snapshots.csv")
    assert {r["run"] for r in snaps} == {"0", "1"}
    first = [r for r in snaps if r["run"] == "0" and r["step"] == "0"]
    assert len(first) == 16 and sum(r["strategy"] == "0" for r in first) == 4
    # the snapshot run replays row 0 of the batch
    last_step = max(int(r["step"]) for r in snaps if r["run"] == "0")
    assert last_step == int(ext[0]["steps"])
    assert set(res.summary["replicator_final_p_r"]) == {"IM", "BD", "DB"}


def test_ess_all_good_start_is_extinct_at_step_zero(tmp_path):
    run_scenario(parse_config(ESS.replace("share_m = 0.75", "share_m = 1.0")), tmp_path)
    _, ext = read_csv(tmp_path / "extinction.csv")
    assert all(r["outcome"] == "r_extinct" and r["steps"] == "0" for r in ext)


def test_theory_check_mutation_exit_code(tmp_path, capsys):
    assert _run(tmp_path, "theory_check", THEORY) == EXIT_OK
    assert _run(tmp_path, "theory_check", THEORY + "mutate = xi2\n", "m") == EXIT_IDENTITY
    _, rows = read_csv(tmp_path / "m/identities.csv")
    failed = {r["identity"] for r in rows if r["passed"] == "0"}
    assert any("xi" in name for name in failed)


def test_theory_check_degree_two_is_config_error(tmp_path):
    assert _run(tmp_path, "theory_check", THEORY + "degree = 2\n") == EXIT_CONFIG


def test_scenario_mismatch_is_config_error(tmp_path, capsys):
    assert _run(tmp_path, "ess_grid", THEORY) == EXIT_CONFIG
    assert "scenario" in capsys.readouterr().err


def test_unknown_key_is_config_error(tmp_path, capsys):
    assert _run(tmp_path, "msd_compare", MSD + "colour = red\n") == EXIT_CONFIG
    assert "c.ini:15" in capsys.readouterr().err


def test_invalid_hastings_is_config_error(tmp_path, capsys):
    text = MSD.replace("uniform, rel_degree_var", "hastings") + "[signal]\nnoise_min = 0.05\n"
    assert _run(tmp_path, "msd_compare", text) == EXIT_CONFIG
    assert "hastings" in capsys.readouterr().err


def test_placement_failure_is_topology_error(tmp_path, capsys):
    assert _run(tmp_path, "diffusion_sweep", SWEEP.replace("20: 1, 3", "21: 1, 3")) == EXIT_TOPOLOGY
    assert _run(tmp_path, "diffusion_sweep", SWEEP.replace("20: 1, 3", "20: 1, 4")) == EXIT_TOPOLOGY
    assert "graph_n4" in capsys.readouterr().err


def test_non_regular_ess_graph_is_topology_error(tmp_path):
    text = ESS.replace("kind = torus", "kind = geometric\nnodes = 12\nradius = 0.5")
    assert _run(tmp_path, "ess_grid", text) == EXIT_TOPOLOGY


def test_threads_flag(tmp_path):
    assert _run(tmp_path, "theory_check", THEORY, extra=["--threads", "1"]) == EXIT_OK
