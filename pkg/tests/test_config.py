import pytest

from adaptnet.experiments.config import ConfigError, TopologyConfigError, load_config, parse_config

BASE = """\
[experiment]
scenario = msd_compare
seed = 7
runs = 3

[topology]
kind = geometric
nodes = 8
radius = 0.6

[msd_compare]
algorithms = uniform, rel_degree
horizon = 20
steady_window = 5
"""


def test_defaults_and_overrides():
    cfg = parse_config(BASE)
    assert cfg.scenario == "msd_compare" and cfg.seed == 7 and cfg.runs == 3
    assert cfg.params["lambda_power"] == 2.0 and cfg.signal["dim"] == 5
    cfg2 = parse_config(BASE, seed=9, runs=4)
    assert (cfg2.seed, cfg2.runs) == (9, 4)
    assert cfg.digest() != cfg2.digest()
    assert parse_config(BASE).digest() == cfg.digest()


def test_default_runs_per_scenario():
    cfg = parse_config("[experiment]\nscenario = ess_grid\nseed = 1\n")
    assert cfg.runs == 200


def test_seed_is_mandatory():
    with pytest.raises(ConfigError, match="seed"):
        parse_config("[experiment]\nscenario = theory_check\n")


def test_unknown_key_reports_line():
    text = BASE + "bogus = 1\n"
    with pytest.raises(ConfigError, match=r"cfg.ini:15: \[msd_compare\] unknown key 'bogus'"):
        parse_config(text, "cfg.ini")


def test_unknown_algorithm_reports_line():
    text = BASE.replace("uniform, rel_degree", "uniform, warp_speed")
    with pytest.raises(ConfigError, match=r"cfg.ini:12: .*warp_speed"):
        parse_config(text, "cfg.ini")


def test_bad_value_type():
    with pytest.raises(ConfigError, match="horizon"):
        parse_config(BASE.replace("horizon = 20", "horizon = many"))


def test_unknown_section():
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config(BASE + "[plots]\nx = 1\n")


def test_steady_window_bounds():
    with pytest.raises(ConfigError, match="steady_window"):
        parse_config(BASE.replace("steady_window = 5", "steady_window = 50"))


def test_theory_degree_two_rejected():
    with pytest.raises(ConfigError, match="degree"):
        parse_config("[experiment]\nscenario = theory_check\nseed = 0\n[theory_check]\ndegree = 2\n")


def test_sweep_sigma_must_be_below_common():
    text = "[experiment]\nscenario = diffusion_sweep\nseed = 0\n[diffusion_sweep]\nsigma_m2 = 0.5, 1.6\n"
    with pytest.raises(ConfigError, match="sigma_m2"):
        parse_config(text)


def test_profiles_from_config():
    cfg = parse_config(BASE + "[signal]\nnoise_min = 0.5\nnoise_max = 1.5\n")
    prof = cfg.build_profiles(3)
    assert [p.noise_variance for p in prof] == [0.5, 1.0, 1.5]
    cfg = parse_config(BASE + "[signal]\nnoise_variances = 1, 2\nstep_sizes = 0.01, 0.02\n")
    assert [p.step_size for p in cfg.build_profiles(2)] == [0.01, 0.02]
    with pytest.raises(ConfigError, match="noise_variances"):
        cfg.build_profiles(3)


def test_topology_errors():
    cfg = parse_config(BASE.replace("kind = geometric", "kind = circulant\noffsets = 2"))
    with pytest.raises(TopologyConfigError):
        cfg.build_topology()


def test_edgelist_relative_path(tmp_path):
    (tmp_path / "g.txt").write_text("# triangle\n3\n0 1\n1 2\n0 2\n")
    p = tmp_path / "c.ini"
    p.write_text(BASE.replace("kind = geometric", "kind = edgelist\npath = g.txt"))
    assert load_config(p).build_topology().node_count == 3


def test_missing_file():
    with pytest.raises(ConfigError, match="cannot read"):
        load_config("/nonexistent/x.ini")
