"""End-to-end tests of the experiments, their result files and the CLI."""

import json

import pytest

import main as cli
from config import load_config
from config.experiment import ExperimentConfig
from experiments import BaseExperiment, ExperimentRegistry, ExperimentResult, default_registry
from experiments.output import format_value, read_csv
from experiments.sweeps import draw_cluster_rho
from experiments.verify import DEFAULT_SETTINGS, STREAM_VERIFY, check_haar_alignment
from linalg.errors import ConfigError
from risk.montecarlo import McConfig
from sampler.streams import RandomStream

TIMESTAMP = "2024-06-11T00:00:00+00:00"

SMALL_VERIFY = {
    "penrose_matrices": 50,
    "min_norm_instances": 3,
    "min_norm_perturbations": 100,
    "alignment_instances": 10,
    "haar_draws": 2000,
    "haar_rotations": 300,
    "stieltjes_cases": 30,
    "bias_n_beta": 200,
}


def _config(name, tmp_path, n_x=40, **section):
    cfg = load_config()
    cfg["mc"]["n_x"] = n_x
    cfg["run"]["seed"] = 5
    cfg["run"]["timestamp"] = TIMESTAMP
    suffix = "json" if name == "verify" else "csv"
    cfg[name].update(section, output=str(tmp_path / f"{name}.{suffix}"))
    return ExperimentConfig.from_dict(cfg, name)


def _run(name, tmp_path, **kwargs):
    cfg = _config(name, tmp_path, **kwargs)
    return cfg, default_registry().call(name, cfg)


SMALL_AR1 = {"n": 10, "p": 20, "sigma2": [0.5, 1.0], "rho2": [0.0, 0.5]}
SMALL_CLUSTER = {"n": 10, "p": 20, "sizes": [5, 5], "rho": [0.1, 0.1],
                 "sigma2_1": [2.0, 3.0], "sigma2_2": [1.0, 2.0]}


# =========================================================================
#                          TestOutput
# =========================================================================

class TestOutput:
    def test_format_value(self):
        assert format_value(0.1) == "0.10000000000000001"
        assert format_value(True) == "true"
        assert format_value(3) == "3"

    def test_float_round_trip(self):
        v = 1.0 / 3.0
        assert float(format_value(v)) == v


# =========================================================================
#                          TestAr1Sweep
# =========================================================================

class TestAr1Sweep:
    def test_writes_grid(self, clean_env, tmp_path):
        cfg, result = _run("ar1_sweep", tmp_path, **SMALL_AR1)
        assert result.success, result.error
        header, rows = read_csv(cfg.output_path)
        assert header["experiment"] == "ar1_sweep"
        assert header["seed"] == "5"
        assert header["timestamp"] == TIMESTAMP
        assert header["columns"].split(",")[:3] == ["sigma2", "rho2", "trace_omega_over_n"]
        assert len(rows) == 4 and result.data["rows"] == 4

    def test_equal_trace_rows_share_theory(self, clean_env, tmp_path):
        cfg, _ = _run("ar1_sweep", tmp_path, **SMALL_AR1)
        _, rows = read_csv(cfg.output_path)
        by_point = {(r["sigma2"], r["rho2"]): r for r in rows}
        a, b = by_point[(1.0, 0.0)], by_point[(0.5, 0.5)]
        assert a["trace_omega_over_n"] == b["trace_omega_over_n"] == 1.0
        for col in ("theory_var_pred", "theory_var_pred_se", "theory_var_est", "theory_var_est_se"):
            assert a[col] == b[col]

    def test_mc_within_theory(self, clean_env, tmp_path):
        _, result = _run("ar1_sweep", tmp_path, **SMALL_AR1)
        assert result.data["mc_outside_3se"] == 0

    def test_byte_identical_rerun(self, clean_env, tmp_path):
        cfg, _ = _run("ar1_sweep", tmp_path, **SMALL_AR1)
        first = cfg.output_path.read_bytes()
        _run("ar1_sweep", tmp_path, **SMALL_AR1)
        assert cfg.output_path.read_bytes() == first

    def test_seed_changes_data(self, clean_env, tmp_path):
        cfg, _ = _run("ar1_sweep", tmp_path, **SMALL_AR1)
        _, rows_a = read_csv(cfg.output_path)
        raw = load_config()
        raw["mc"]["n_x"] = 40
        raw["run"]["seed"] = 6
        raw["ar1_sweep"].update(SMALL_AR1, output=str(tmp_path / "other.csv"))
        other = ExperimentConfig.from_dict(raw, "ar1_sweep")
        default_registry().call("ar1_sweep", other)
        _, rows_b = read_csv(other.output_path)
        assert rows_a[0]["mc_var_pred"] != rows_b[0]["mc_var_pred"]


# =========================================================================
#                          TestClusterSweep
# =========================================================================

class TestClusterSweep:
    def test_equal_trace_pairs(self, clean_env, tmp_path):
        cfg, result = _run("cluster_sweep", tmp_path, **SMALL_CLUSTER)
        assert result.success, result.error
        _, rows = read_csv(cfg.output_path)
        by_point = {(r["sigma2_1"], r["sigma2_2"]): r for r in rows}
        a, b = by_point[(2.0, 2.0)], by_point[(3.0, 1.0)]
        assert a["trace_omega_over_n"] == b["trace_omega_over_n"] == 2.0
        assert a["theory_var_pred"] == b["theory_var_pred"]
        assert a["theory_var_est"] == b["theory_var_est"]

    def test_non_pd_grid_rejected(self, clean_env, tmp_path):
        with pytest.raises(ConfigError) as info:
            _config("cluster_sweep", tmp_path, **{**SMALL_CLUSTER, "rho": [2.5, 0.1]})
        assert "not positive definite" in str(info.value)


# =========================================================================
#                          TestOffdiagStudy
# =========================================================================

class TestOffdiagStudy:
    def test_random_rho_leaves_theory_unchanged(self, clean_env, tmp_path):
        cfg, result = _run("offdiag_study", tmp_path, **{**SMALL_CLUSTER, "rho": [0.02, 0.02], "rho_max": 0.05})
        assert result.success, result.error
        assert result.data["max_theory_gap"] == 0.0
        _, rows = read_csv(cfg.output_path)
        for r in rows:
            assert 0.0 <= r["rho_1"] <= 0.05 and 0.0 <= r["rho_2"] <= 0.05
            assert r["theory_var_pred"] == r["fixed_theory_var_pred"]

    def test_zero_rho_max(self, clean_env, tmp_path):
        cfg, result = _run("offdiag_study", tmp_path, **{**SMALL_CLUSTER, "rho": [0.0, 0.0], "rho_max": 0.0})
        _, rows = read_csv(cfg.output_path)
        assert all(r["rho_1"] == 0.0 and r["rho_2"] == 0.0 for r in rows)
        assert all(r["mc_var_pred"] == r["fixed_mc_var_pred"] for r in rows)

    def test_rho_stream_does_not_move_theory(self, clean_env, tmp_path):
        section = {**SMALL_CLUSTER, "rho": [0.02, 0.02], "rho_max": 0.05}
        cfg_a, _ = _run("offdiag_study", tmp_path, **section)
        _, rows_a = read_csv(cfg_a.output_path)
        cfg_b, _ = _run("offdiag_study", tmp_path / "b", rho_stream_id=19, **section)
        _, rows_b = read_csv(cfg_b.output_path)
        assert [r["rho_1"] for r in rows_a] != [r["rho_1"] for r in rows_b]
        for a, b in zip(rows_a, rows_b):
            assert a["theory_var_pred"] == b["theory_var_pred"]
            assert a["theory_var_est"] == b["theory_var_est"]

    def test_rho_draws_reproducible(self):
        assert draw_cluster_rho(5, 3, 0.05) == draw_cluster_rho(5, 3, 0.05)
        assert draw_cluster_rho(5, 3, 0.05) != draw_cluster_rho(5, 4, 0.05)


# =========================================================================
#                          TestDescentCurve
# =========================================================================

class TestDescentCurve:
    def test_rows_and_references(self, clean_env, tmp_path):
        cfg, result = _run("descent_curve", tmp_path, n=10, gammas=[2.0, 4.0], kappa2=[1.0, 2.0])
        assert result.success, result.error
        _, rows = read_csv(cfg.output_path)
        assert [(r["gamma"], r["kappa2"]) for r in rows] == [(2.0, 1.0), (2.0, 2.0), (4.0, 1.0), (4.0, 2.0)]
        first = rows[0]
        assert first["p"] == 20.0
        assert first["theory_bias2"] == 0.5 and first["exact_bias2_pred"] == 0.5
        assert first["s_star"] == pytest.approx(1.0, rel=1e-10)
        assert first["asymptotic_risk_est"] == pytest.approx(1.5, rel=1e-10)
        assert rows[3]["iso_reference"] == pytest.approx(2.0 / 3.0)

    def test_anisotropic_exact_bias(self, clean_env, tmp_path):
        features = {"kind": "haar_spectrum", "parameters": {"unit_mean": True, "stream_id": 11}}
        cfg, result = _run("descent_curve", tmp_path, n=10, gammas=[2.0], kappa2=[1.0], features=features)
        assert result.success, result.error
        _, rows = read_csv(cfg.output_path)
        assert rows[0]["exact_bias2_pred"] >= rows[0]["theory_bias2"] * (1 - 1e-12)
        assert rows[0]["theory_var_est"] >= rows[0]["iso_reference"]

    def test_theory_near_limit_for_wide_designs(self, clean_env, tmp_path):
        cfg, result = _run("descent_curve", tmp_path, n=10, gammas=[4.0, 10.0], kappa2=[1.0, 2.0, 4.0])
        assert result.success, result.error
        _, rows = read_csv(cfg.output_path)
        assert len(rows) == 6
        for row in rows:
            omega2 = row["kappa2"]
            assert row["theory_var_est"] == pytest.approx(omega2 / (row["gamma"] - 1.0), rel=0.15)
            assert row["theory_var_pred"] == pytest.approx(omega2 / (row["gamma"] - 1.0), rel=0.15)
            for target in ("pred", "est"):
                gap = abs(row[f"mc_var_{target}"] - row[f"theory_var_{target}"])
                assert gap <= 3.0 * row[f"mc_var_{target}_se"] + 1e-12 * row[f"theory_var_{target}"]


# =========================================================================
#                          TestVerify
# =========================================================================

class TestVerify:
    def test_all_checks_pass(self, clean_env, tmp_path):
        cfg, result = _run("verify", tmp_path, n_x=60, **SMALL_VERIFY)
        assert result.success, result.error
        doc = json.loads(cfg.output_path.read_text())
        assert doc["all_passed"] is True
        assert doc["seed"] == 5
        assert doc["inject_fault"] is False
        assert len(doc["checks"]) == 9

    def test_injected_fault_detected(self, clean_env, tmp_path):
        cfg, result = _run("verify", tmp_path, n_x=60, inject_fault=True, **SMALL_VERIFY)
        assert not result.success
        failed = {c["name"] for c in json.loads(cfg.output_path.read_text())["checks"] if not c["passed"]}
        assert "haar_first_column_mean" in failed
        assert "haar_average_alignment" in failed
        assert "haar_first_column_mean" in result.error

    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_haar_average_tracks_sign_correction(self, seed):
        rng = RandomStream(seed, STREAM_VERIFY)
        settings = {**DEFAULT_SETTINGS, "haar_rotations": 2000}
        assert check_haar_alignment(rng, settings, McConfig()).passed
        faulty = check_haar_alignment(rng, {**settings, "inject_fault": True}, McConfig())
        assert not faulty.passed
        assert "sign_fix=False" in faulty.detail


# =========================================================================
#                          TestRegistry
# =========================================================================

class _Broken(BaseExperiment):
    name = "broken"
    description = "always raises"
    columns = []

    def run(self, cfg):
        raise RuntimeError("boom")


class TestRegistry:
    def test_default_names(self):
        assert default_registry().names() == [
            "ar1_sweep", "cluster_sweep", "offdiag_study", "descent_curve", "verify"]

    def test_unknown(self, clean_env, tmp_path):
        result = default_registry().call("nope", None)
        assert not result.success and "Unknown experiment" in result.error

    def test_exception_captured(self):
        registry = ExperimentRegistry()
        registry.register(_Broken())
        result = registry.call("broken", None)
        assert isinstance(result, ExperimentResult)
        assert result.error == "boom" and not result.config_error


# =========================================================================
#                          TestMain
# =========================================================================

class TestMain:
    def test_list(self, clean_env):
        assert cli.main(["list"]) == cli.EXIT_OK

    def test_config_error_exit_code(self, clean_env, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("ar1_sweep:\n  rho2: [0.5, 1.5]\n")
        assert cli.main(["ar1_sweep", "--config", str(path)]) == cli.EXIT_CONFIG

    def test_missing_config_exit_code(self, clean_env):
        assert cli.main(["ar1_sweep", "--config", "missing.yaml"]) == cli.EXIT_CONFIG

    def test_run_with_overrides(self, clean_env, tmp_path):
        path = tmp_path / "small.yaml"
        path.write_text(
            "run:\n  timestamp: '2024-06-11T00:00:00+00:00'\n"
            "descent_curve:\n  n: 10\n  gammas: [2.0]\n  kappa2: [1.0]\n"
        )
        out = tmp_path / "d.csv"
        code = cli.main(["descent_curve", "--config", str(path), "--seed", "3", "--n-x", "20", "--out", str(out)])
        assert code == cli.EXIT_OK
        header, rows = read_csv(out)
        assert header["seed"] == "3"
        assert len(rows) == 1
