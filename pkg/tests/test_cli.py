import copy
import json
from pathlib import Path

import pytest

from maxfilter_lab.cli import (ExperimentConfig, build_parser, load_config,
                               main, run)
from maxfilter_lab.errors import ConfigError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write_config(tmp_path, payload, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return str(p)


SF2_BOUNDS = {
    "group_spec": {"family": "sign_flips", "param": 2},
    "templates": {"sampler": "gaussian", "n": 3},
    "chi": 1,
    "n_pairs": 50,
    "seed": 7,
}


def strip_timings(report: dict) -> dict:
    out = copy.deepcopy(report)
    out.pop("timings", None)
    return out


# ---------------------------------------------------------------------------
# happy paths


def test_bounds_golden_config_passes(tmp_path, capsys):
    code = run("bounds", str(CONFIGS / "bounds_golden.json"),
               out=str(tmp_path))
    assert code == 0
    report = json.loads((tmp_path / "bounds_report.json").read_text())
    assert report["passed"] is True
    assert report["subcommand"] == "bounds"
    assert report["seed_provenance"]["source"] == "config"
    assert report["config"] == json.loads(
        (CONFIGS / "bounds_golden.json").read_text())
    for a in report["assertions"]:
        assert set(a) >= {"name", "claim", "passed", "value", "tolerance"}
        assert a["passed"] is True
    assert (tmp_path / "bounds_pairs.csv").exists()
    outtext = capsys.readouterr().out
    assert "[PASS]" in outtext and "[FAIL]" not in outtext


def test_seed_flag_overrides_config(tmp_path):
    cfg = write_config(tmp_path, SF2_BOUNDS)
    assert run("bounds", cfg, seed=99, out=str(tmp_path / "a")) == 0
    report = json.loads((tmp_path / "a" / "bounds_report.json").read_text())
    assert report["seed_provenance"] == {
        "seed": 99, "source": "flag",
        "streams": report["seed_provenance"]["streams"]}
    assert report["seed_provenance"]["streams"]  # stream map is recorded


@pytest.mark.parametrize("sub,payload,csvname", [
    ("kernel", {"group_spec": {"family": "cyclic_rotation_2d", "param": 5},
                "n_trials": 20, "points_per_trial": 5, "chi_samples": 100,
                "seed": 3}, "kernel_chi_samples.csv"),
    ("maxfilter", {"group_spec": {"family": "circular_shifts", "param": 4},
                   "dims": [4, 8], "n_pairs": 10, "seed": 3},
     "maxfilter_pairs.csv"),
    ("chi", {"group_spec": {"family": "permutations", "param": 3},
             "chi_samples": 100, "expected_chi": 1,
             "expected_saturated": False, "seed": 3}, "chi_samples.csv"),
    ("injectivity", {"group_spec": {"family": "cyclic_rotation_2d",
                                    "param": 5},
                     "chi": 2, "n_pairs": 2000, "seed": 3},
     "injectivity_pairs.csv"),
])
def test_subcommands_small_runs(tmp_path, sub, payload, csvname):
    cfg = write_config(tmp_path, payload)
    assert run(sub, cfg, out=str(tmp_path / "out")) == 0
    report = json.loads((tmp_path / "out" / f"{sub}_report.json").read_text())
    assert report["passed"] is True
    assert (tmp_path / "out" / csvname).exists()


def test_distortion_small_run(tmp_path):
    payload = {
        "group_spec": {"family": "cyclic_rotation_2d", "param": 3},
        "templates": {"sampler": "gaussian", "n": 16},
        "chi": 2, "lambda0": 4.0, "n_trials": 2, "n_pairs": 50, "seed": 3,
    }
    cfg = write_config(tmp_path, payload)
    assert run("distortion", cfg, out=str(tmp_path / "out")) == 0
    report = json.loads(
        (tmp_path / "out" / "distortion_report.json").read_text())
    assert report["passed"] is True
    assert report["results"]["n_trials"] == 2
    assert report["results"]["fraction_within_bound"] == 1.0


def test_reports_are_deterministic(tmp_path):
    payload = {"group_spec": {"family": "cyclic_rotation_2d", "param": 5},
               "n_trials": 20, "points_per_trial": 5, "chi_samples": 100,
               "seed": 3}
    cfg = write_config(tmp_path, payload)
    for d in ("r1", "r2"):
        assert run("kernel", cfg, out=str(tmp_path / d)) == 0
    r1 = json.loads((tmp_path / "r1" / "kernel_report.json").read_text())
    r2 = json.loads((tmp_path / "r2" / "kernel_report.json").read_text())
    assert strip_timings(r1) == strip_timings(r2)
    c1 = (tmp_path / "r1" / "kernel_chi_samples.csv").read_bytes()
    c2 = (tmp_path / "r2" / "kernel_chi_samples.csv").read_bytes()
    assert c1 == c2


# ---------------------------------------------------------------------------
# exit codes


def test_exit_one_on_failed_assertion(tmp_path, capsys):
    payload = {"group_spec": {"family": "permutations", "param": 3},
               "chi_samples": 100, "expected_chi": 3, "seed": 3}
    cfg = write_config(tmp_path, payload)
    assert run("chi", cfg, out=str(tmp_path / "out")) == 1
    assert "[FAIL]" in capsys.readouterr().out
    report = json.loads((tmp_path / "out" / "chi_report.json").read_text())
    assert report["passed"] is False


def test_exit_two_missing_seed(tmp_path):
    payload = {k: v for k, v in SF2_BOUNDS.items() if k != "seed"}
    cfg = write_config(tmp_path, payload)
    assert main(["bounds", "--config", cfg]) == 2


def test_exit_two_unknown_key(tmp_path):
    payload = dict(SF2_BOUNDS, typo_field=1)
    cfg = write_config(tmp_path, payload)
    assert main(["bounds", "--config", cfg]) == 2


def test_exit_two_bad_family(tmp_path):
    payload = dict(SF2_BOUNDS, group_spec={"family": "icosahedral", "param": 1})
    cfg = write_config(tmp_path, payload)
    assert main(["bounds", "--config", cfg]) == 2


def test_exit_two_missing_config_file(tmp_path):
    assert main(["bounds", "--config", str(tmp_path / "nope.json")]) == 2


def test_exit_two_malformed_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["bounds", "--config", str(p)]) == 2


def test_exit_two_bad_tolerance_key(tmp_path):
    payload = dict(SF2_BOUNDS, tolerances={"no_such_tol": 1e-6})
    cfg = write_config(tmp_path, payload)
    assert main(["bounds", "--config", cfg]) == 2


def test_exit_two_lambda_below_floor(tmp_path):
    # n=4 templates with chi=2, d=2 gives lambda=1 < lambda0
    payload = {
        "group_spec": {"family": "cyclic_rotation_2d", "param": 3},
        "templates": {"sampler": "gaussian", "n": 4},
        "chi": 2, "lambda0": 4.0, "n_trials": 1, "n_pairs": 20, "seed": 3,
    }
    cfg = write_config(tmp_path, payload)
    assert main(["distortion", "--config", cfg]) == 2


def test_exit_three_tiny_lp_budget(tmp_path, capsys):
    payload = dict(SF2_BOUNDS, budgets={"lp_solves": 2})
    cfg = write_config(tmp_path, payload)
    assert run("bounds", cfg, out=str(tmp_path / "out")) == 3
    report = json.loads((tmp_path / "out" / "bounds_report.json").read_text())
    prov = report["results"]["stability"]["provenance"]
    assert prov["beta_exact_certified"] is False


# ---------------------------------------------------------------------------
# config validation units


def test_config_rejects_bad_counts():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(dict(SF2_BOUNDS, n_pairs=0))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(dict(SF2_BOUNDS, chi=0))


def test_config_rejects_double_template_source():
    bad = dict(SF2_BOUNDS,
               templates={"path": "x.csv", "sampler": "gaussian", "n": 3})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(bad)


def test_config_rejects_non_gaussian_sampler():
    bad = dict(SF2_BOUNDS, templates={"sampler": "uniform", "n": 3})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(bad)


def test_config_rejects_group_spec_without_source():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(dict(SF2_BOUNDS, group_spec={}))


def test_config_rejects_unknown_budget():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(dict(SF2_BOUNDS,
                                        budgets={"lp_solvs": 10}))


def test_load_config_round_trips_raw(tmp_path):
    cfg_path = write_config(tmp_path, SF2_BOUNDS)
    config, raw = load_config(cfg_path)
    assert raw == SF2_BOUNDS
    assert config.n_pairs == 50
    assert config.seed == 7


# ---------------------------------------------------------------------------
# argparse surface


def test_parser_requires_subcommand():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_parser_requires_config():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["bounds"])


def test_parser_accepts_all_subcommands():
    parser = build_parser()
    for sub in ("bounds", "distortion", "injectivity", "kernel",
                "maxfilter", "chi"):
        ns = parser.parse_args([sub, "--config", "c.json", "--seed", "4"])
        assert ns.subcommand == sub
        assert ns.seed == 4
