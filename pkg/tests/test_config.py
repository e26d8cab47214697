"""Tests for config loading, overrides and per-experiment validation."""

from pathlib import Path

import pytest

from config import apply_overrides, load_config
from config.experiment import ExperimentConfig, cluster_violations
from linalg.errors import ConfigError


def _cfg(experiment, **section):
    cfg = load_config()
    cfg[experiment].update(section)
    return cfg


# =========================================================================
#                          TestLoadConfig
# =========================================================================

class TestLoadConfig:
    def test_defaults(self, clean_env):
        cfg = load_config()
        assert cfg["run"]["seed"] == 20240611
        assert cfg["ar1_sweep"]["n"] == 50 and cfg["ar1_sweep"]["p"] == 100
        assert len(cfg["ar1_sweep"]["sigma2"]) == 10
        assert cfg["cluster_sweep"]["sizes"] == [5, 15]

    def test_preset_by_name(self, clean_env):
        cfg = load_config("descent_isotropic.yaml")
        assert cfg["descent_curve"]["gammas"][-1] == 100.0
        # untouched sections keep their defaults
        assert cfg["ar1_sweep"]["p"] == 100

    def test_override_file(self, clean_env, tmp_path):
        path = tmp_path / "small.yaml"
        path.write_text("mc:\n  n_x: 7\nar1_sweep:\n  sigma2: [0.5]\n")
        cfg = load_config(str(path))
        assert cfg["mc"]["n_x"] == 7
        assert cfg["mc"]["n_eps"] == 100
        assert cfg["ar1_sweep"]["sigma2"] == [0.5]

    def test_missing_file(self, clean_env):
        with pytest.raises(FileNotFoundError):
            load_config("no_such_preset.yaml")

    def test_env_overrides_coerced(self, clean_env):
        clean_env.setenv("RISKLAB_THREADS", "4")
        clean_env.setenv("RISKLAB_SEED", "99")
        clean_env.setenv("RISKLAB_OUTPUT_DIR", "/tmp/out")
        cfg = load_config()
        assert cfg["run"]["threads"] == 4
        assert cfg["run"]["seed"] == 99
        assert cfg["run"]["output_dir"] == "/tmp/out"

    def test_apply_overrides_copies(self, clean_env):
        cfg = load_config()
        out = apply_overrides(cfg, {("run", "seed"): 5, ("mc", "n_x"): None, ("verify", "inject_fault"): True})
        assert out["run"]["seed"] == 5
        assert out["mc"]["n_x"] == cfg["mc"]["n_x"]
        assert out["verify"]["inject_fault"] is True
        assert cfg["run"]["seed"] == 20240611


# =========================================================================
#                          TestExperimentConfig
# =========================================================================

class TestExperimentConfig:
    def test_ar1_defaults(self, clean_env):
        ec = ExperimentConfig.from_dict(load_config(), "ar1_sweep")
        assert (ec.n, ec.p) == (50, 100)
        assert ec.mc.n_x == 100 and ec.mc.seed == 20240611
        assert ec.output_path == Path("results/ar1_sweep.csv")
        assert ec.grid("rho2")[0] == 0.0

    def test_verify_writes_json(self, clean_env):
        ec = ExperimentConfig.from_dict(load_config(), "verify")
        assert ec.output_path.suffix == ".json"

    def test_explicit_output_and_timestamp(self, clean_env):
        cfg = _cfg("descent_curve", output="elsewhere/d.csv")
        cfg["run"]["timestamp"] = "2024-06-11T00:00:00+00:00"
        ec = ExperimentConfig.from_dict(cfg, "descent_curve")
        assert ec.output_path == Path("elsewhere/d.csv")
        assert ec.timestamp == "2024-06-11T00:00:00+00:00"

    def test_all_defaults_validate(self, clean_env):
        for name in ("ar1_sweep", "cluster_sweep", "offdiag_study", "descent_curve", "verify"):
            assert ExperimentConfig.from_dict(load_config(), name).experiment == name

    @pytest.mark.parametrize("experiment,section,field", [
        ("ar1_sweep", {"rho2": [0.5, 1.0]}, "ar1_sweep.rho2"),
        ("ar1_sweep", {"sigma2": [0.0]}, "ar1_sweep.sigma2"),
        ("ar1_sweep", {"sigma2": []}, "ar1_sweep.sigma2"),
        ("ar1_sweep", {"sigma2": ["a"]}, "ar1_sweep.sigma2"),
        ("ar1_sweep", {"p": 40}, "ar1_sweep.p"),
        ("ar1_sweep", {"n": 2.5}, "ar1_sweep.n"),
        ("cluster_sweep", {"sizes": [5, 10]}, "cluster_sweep.sizes"),
        ("cluster_sweep", {"rho": [0.05]}, "cluster_sweep.rho"),
        ("cluster_sweep", {"rho": [0.5, 0.05]}, "cluster_sweep"),
        ("offdiag_study", {"rho_max": -0.1}, "offdiag_study.rho_max"),
        ("offdiag_study", {"rho_max": 0.5}, "offdiag_study"),
        ("descent_curve", {"gammas": [1.0, 2.0]}, "descent_curve.gammas"),
        ("descent_curve", {"gammas": [150.0]}, "descent_curve.gammas"),
        ("descent_curve", {"gammas": [1.001]}, "descent_curve.gammas"),
        ("descent_curve", {"kappa2": [0.0]}, "descent_curve.kappa2"),
    ])
    def test_invalid_field_named(self, clean_env, experiment, section, field):
        with pytest.raises(ConfigError) as info:
            ExperimentConfig.from_dict(_cfg(experiment, **section), experiment)
        assert info.value.field == field

    def test_missing_key(self, clean_env):
        cfg = load_config()
        del cfg["ar1_sweep"]["rho2"]
        with pytest.raises(ConfigError, match="ar1_sweep.rho2"):
            ExperimentConfig.from_dict(cfg, "ar1_sweep")

    def test_bad_mc(self, clean_env):
        cfg = load_config()
        cfg["mc"]["n_x"] = 1
        with pytest.raises(ConfigError) as info:
            ExperimentConfig.from_dict(cfg, "ar1_sweep")
        assert info.value.field == "mc"

    def test_unknown_experiment(self, clean_env):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(load_config(), "unknown_experiment")


# =========================================================================
#                          TestClusterViolations
# =========================================================================

class TestClusterViolations:
    def test_valid_grid(self):
        assert cluster_violations([5, 15], [0.05, 0.05], [0.1, 1.0], [0.1, 1.0]) == []

    def test_rho_above_variance(self):
        bad = cluster_violations([5, 15], [0.2, 0.05], [0.1, 1.0], [0.5])
        assert len(bad) == 1 and "sigma2_1=0.1" in bad[0]

    def test_singleton_group_any_rho(self):
        assert cluster_violations([1, 3], [5.0, 0.1], [0.5], [0.5]) == []

    def test_negative_rho_floor(self):
        # lower edge -sigma2 / (n_g - 1) = -0.25 for a group of five with sigma2 = 1
        assert cluster_violations([5, 5], [-0.2, 0.0], [1.0], [1.0]) == []
        assert cluster_violations([5, 5], [-0.25, 0.0], [1.0], [1.0]) != []
