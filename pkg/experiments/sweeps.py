"""Contour sweeps over noise-covariance grids (AR(1), clustered, random off-diagonals).

Every grid point of a sweep is served by one shared pass over the X draws, so
two points with equal Tr(Omega)/n get bit-identical theory columns.
"""

from __future__ import annotations

import logging
from typing import Callable

from config.experiment import ExperimentConfig
from experiments import BaseExperiment, ExperimentResult
from experiments.output import write_csv
from linalg.errors import ConfigError, RiskLabError
from models.noise import NoiseCovariance, build_ar1_rho2, build_clustered, trace_over_n
from models.specs import features_from_record
from risk.montecarlo import DesignPass, McEstimate, Target, agree_within, run_design_pass
from sampler.streams import RandomStream

logger = logging.getLogger(__name__)

STREAM_OFFDIAG = 9

VARIANCE_COLUMNS = [
    "trace_omega_over_n",
    "mc_var_pred", "mc_var_pred_se", "theory_var_pred", "theory_var_pred_se",
    "mc_var_est", "mc_var_est_se", "theory_var_est", "theory_var_est_se",
]


def build_point(builder: Callable[[], NoiseCovariance], field: str, point: str) -> NoiseCovariance:
    try:
        return builder()
    except RiskLabError as exc:
        raise ConfigError(field, f"invalid grid point {point}: {exc}") from exc


def variance_columns(dp: DesignPass, k: int) -> dict[str, float]:
    """MC and theory variance columns of noise model k in a design pass."""
    kappa2 = trace_over_n(dp.noises[k])
    fp = dp.trace_factor(Target.PREDICTION)
    fe = dp.trace_factor(Target.ESTIMATION)
    vp = dp.variance(k, Target.PREDICTION)
    ve = dp.variance(k, Target.ESTIMATION)
    return {
        "trace_omega_over_n": kappa2,
        "mc_var_pred": vp.estimate,
        "mc_var_pred_se": vp.std_error,
        "theory_var_pred": kappa2 * fp.estimate,
        "theory_var_pred_se": kappa2 * fp.std_error,
        "mc_var_est": ve.estimate,
        "mc_var_est_se": ve.std_error,
        "theory_var_est": kappa2 * fe.estimate,
        "theory_var_est_se": kappa2 * fe.std_error,
    }


def count_disagreements(rows: list[dict[str, float]], k: float = 3.0) -> int:
    """Rows where an MC variance column misses its theory value by more than k combined SE."""
    bad = 0
    for row in rows:
        for t in ("pred", "est"):
            mc = McEstimate(row[f"mc_var_{t}"], row[f"mc_var_{t}_se"])
            th = McEstimate(row[f"theory_var_{t}"], row[f"theory_var_{t}_se"])
            if not agree_within(mc, th, k):
                bad += 1
                break
    return bad


def _finish(name: str, cfg: ExperimentConfig, columns: list[str], rows: list[dict],
            dp: DesignPass, **extra) -> ExperimentResult:
    path = write_csv(cfg.output_path, cfg, columns, rows)
    summary = {
        "rows": len(rows),
        "resampled": dp.resampled,
        "mc_outside_3se": count_disagreements(rows),
        **extra,
    }
    logger.info("%s finished: %s", name, summary)
    return ExperimentResult(
        success=True,
        data=summary,
        generated_files=[{"type": "csv", "path": str(path), "label": name}],
    )


# --------------------------------------------------------------------------- #
# AR(1)
# --------------------------------------------------------------------------- #

class Ar1SweepExperiment(BaseExperiment):
    @property
    def name(self) -> str:
        return "ar1_sweep"

    @property
    def description(self) -> str:
        return "AR(1) errors over a (sigma^2, rho^2) grid; expected variances vs Tr(Omega)/n."

    @property
    def columns(self) -> list[str]:
        return ["sigma2", "rho2", *VARIANCE_COLUMNS]

    def run(self, cfg: ExperimentConfig) -> ExperimentResult:
        n, p = cfg.n, cfg.p
        features = features_from_record(cfg.params["features"], p, cfg.seed, field="ar1_sweep.features")
        points = [(s2, r2) for s2 in cfg.grid("sigma2") for r2 in cfg.grid("rho2")]
        logger.info("AR(1) sweep: %d grid points, n=%d, p=%d, N_X=%d", len(points), n, p, cfg.mc.n_x)
        noises = [
            build_point(lambda: build_ar1_rho2(n, s2, r2), "ar1_sweep", f"(sigma2={s2!r}, rho2={r2!r})")
            for s2, r2 in points
        ]
        dp = run_design_pass(features, noises, n, cfg.mc)
        rows = [{"sigma2": s2, "rho2": r2, **variance_columns(dp, k)} for k, (s2, r2) in enumerate(points)]
        return _finish(self.name, cfg, self.columns, rows, dp)


# --------------------------------------------------------------------------- #
# Clustered
# --------------------------------------------------------------------------- #

def _cluster_noise(sizes, s1: float, s2: float, rho) -> NoiseCovariance:
    return build_clustered([(sizes[0], s1, rho[0]), (sizes[1], s2, rho[1])])


class ClusterSweepExperiment(BaseExperiment):
    @property
    def name(self) -> str:
        return "cluster_sweep"

    @property
    def description(self) -> str:
        return "Two-cluster errors over a (sigma_1^2, sigma_2^2) grid with fixed within-cluster covariance."

    @property
    def columns(self) -> list[str]:
        return ["sigma2_1", "sigma2_2", *VARIANCE_COLUMNS]

    def run(self, cfg: ExperimentConfig) -> ExperimentResult:
        n, p = cfg.n, cfg.p
        sizes, rho = cfg.params["sizes"], cfg.params["rho"]
        features = features_from_record(cfg.params["features"], p, cfg.seed, field="cluster_sweep.features")
        points = [(a, b) for a in cfg.grid("sigma2_1") for b in cfg.grid("sigma2_2")]
        logger.info("Cluster sweep: %d grid points, sizes=%s, rho=%s", len(points), sizes, rho)
        noises = [
            build_point(lambda: _cluster_noise(sizes, a, b, rho), "cluster_sweep",
                        f"(sigma2_1={a!r}, sigma2_2={b!r})")
            for a, b in points
        ]
        dp = run_design_pass(features, noises, n, cfg.mc)
        rows = [{"sigma2_1": a, "sigma2_2": b, **variance_columns(dp, k)} for k, (a, b) in enumerate(points)]
        return _finish(self.name, cfg, self.columns, rows, dp)


# --------------------------------------------------------------------------- #
# Random off-diagonal covariances
# --------------------------------------------------------------------------- #

def draw_cluster_rho(seed: int, point: int, rho_max: float, stream_id: int = STREAM_OFFDIAG) -> tuple[float, float]:
    """rho_g ~ U[0, rho_max] for both groups, from the point's own substream."""
    u = RandomStream(seed, stream_id).substream(point).gen.uniform(0.0, rho_max, size=2)
    return float(u[0]), float(u[1])


class OffdiagStudyExperiment(BaseExperiment):
    @property
    def name(self) -> str:
        return "offdiag_study"

    @property
    def description(self) -> str:
        return "Cluster grid with rho_g redrawn per point, paired against the fixed-rho grid."

    @property
    def columns(self) -> list[str]:
        return [
            "sigma2_1", "sigma2_2", "rho_1", "rho_2", *VARIANCE_COLUMNS,
            "fixed_mc_var_pred", "fixed_mc_var_pred_se", "fixed_theory_var_pred",
            "fixed_mc_var_est", "fixed_mc_var_est_se", "fixed_theory_var_est",
        ]

    def run(self, cfg: ExperimentConfig) -> ExperimentResult:
        n, p = cfg.n, cfg.p
        sizes, rho = cfg.params["sizes"], cfg.params["rho"]
        rho_max = cfg.params["rho_max"]
        stream_id = int(cfg.params.get("rho_stream_id", STREAM_OFFDIAG))
        features = features_from_record(cfg.params["features"], p, cfg.seed, field="offdiag_study.features")
        points = [(a, b) for a in cfg.grid("sigma2_1") for b in cfg.grid("sigma2_2")]
        drawn = [draw_cluster_rho(cfg.seed, k, rho_max, stream_id) for k in range(len(points))]
        logger.info("Off-diagonal study: %d grid points, rho_g ~ U[0, %g]", len(points), rho_max)

        random_noises = [
            build_point(lambda: _cluster_noise(sizes, a, b, r), "offdiag_study",
                        f"(sigma2_1={a!r}, sigma2_2={b!r}, rho={r})")
            for (a, b), r in zip(points, drawn)
        ]
        fixed_noises = [
            build_point(lambda: _cluster_noise(sizes, a, b, rho), "offdiag_study",
                        f"(sigma2_1={a!r}, sigma2_2={b!r})")
            for a, b in points
        ]
        dp = run_design_pass(features, random_noises + fixed_noises, n, cfg.mc)

        rows = []
        gap = 0.0
        mc_shift = 0
        k_fixed = len(points)
        for k, ((a, b), (r1, r2)) in enumerate(zip(points, drawn)):
            cols = variance_columns(dp, k)
            fixed = variance_columns(dp, k_fixed + k)
            for t in ("pred", "est"):
                gap = max(gap, abs(cols[f"theory_var_{t}"] - fixed[f"theory_var_{t}"]))
                if not agree_within(McEstimate(cols[f"mc_var_{t}"], cols[f"mc_var_{t}_se"]),
                                    McEstimate(fixed[f"mc_var_{t}"], fixed[f"mc_var_{t}_se"])):
                    mc_shift += 1
            rows.append({
                "sigma2_1": a, "sigma2_2": b, "rho_1": r1, "rho_2": r2, **cols,
                "fixed_mc_var_pred": fixed["mc_var_pred"],
                "fixed_mc_var_pred_se": fixed["mc_var_pred_se"],
                "fixed_theory_var_pred": fixed["theory_var_pred"],
                "fixed_mc_var_est": fixed["mc_var_est"],
                "fixed_mc_var_est_se": fixed["mc_var_est_se"],
                "fixed_theory_var_est": fixed["theory_var_est"],
            })
        return _finish(self.name, cfg, self.columns, rows, dp, max_theory_gap=gap, mc_shift_outside_3se=mc_shift)
