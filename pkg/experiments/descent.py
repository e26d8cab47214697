"""Descent curve: finite-n risks against their gamma = p/n limits."""

from __future__ import annotations

import logging

from asymptotics.stieltjes import SpectrumMeasure, isotropic_s_star, limit_estimation_risk
from config.experiment import ExperimentConfig
from experiments import BaseExperiment, ExperimentResult
from experiments.output import write_csv
from models.noise import build_isotropic
from models.specs import features_from_record
from risk.montecarlo import Target, run_design_pass
from risk.theory import theory_bias2, theory_bias2_exact_pred

logger = logging.getLogger(__name__)


class DescentCurveExperiment(BaseExperiment):
    @property
    def name(self) -> str:
        return "descent_curve"

    @property
    def description(self) -> str:
        return "Bias, variance and risk over gamma for Omega = kappa2 * I, with the asymptotic references."

    @property
    def columns(self) -> list[str]:
        return [
            "gamma", "p", "kappa2",
            "mc_var_pred", "mc_var_pred_se", "theory_var_pred",
            "mc_var_est", "mc_var_est_se", "theory_var_est",
            "theory_bias2", "exact_bias2_pred", "asymptotic_bias2",
            "iso_reference", "s_star", "asymptotic_var_est",
            "theory_risk_pred", "theory_risk_est", "asymptotic_risk_est",
        ]

    def run(self, cfg: ExperimentConfig) -> ExperimentResult:
        n = cfg.n
        r2 = cfg.params["r2"]
        levels = cfg.grid("kappa2")
        noises = [build_isotropic(n, k2) for k2 in levels]
        rows = []
        resampled = 0
        gammas = cfg.grid("gammas")
        for i, gamma in enumerate(gammas):
            p = round(n * gamma)
            logger.info("Descent point %d/%d: gamma=%g (p=%d)", i + 1, len(gammas), gamma, p)
            features = features_from_record(cfg.params["features"], p, cfg.seed, field="descent_curve.features")
            dp = run_design_pass(features, noises, n, cfg.mc)
            resampled += dp.resampled
            fp = dp.trace_factor(Target.PREDICTION).estimate
            fe = dp.trace_factor(Target.ESTIMATION).estimate
            bias2 = theory_bias2(r2, n, p)
            if features.is_isotropic:
                exact_pred = bias2
            else:
                exact_pred = theory_bias2_exact_pred(features, n, r2, cfg.mc).estimate
            h = SpectrumMeasure.from_features(features)
            for k, k2 in enumerate(levels):
                vp = dp.variance(k, Target.PREDICTION)
                ve = dp.variance(k, Target.ESTIMATION)
                limit = limit_estimation_risk(r2, k2, gamma, h)
                rows.append({
                    "gamma": gamma,
                    "p": p,
                    "kappa2": k2,
                    "mc_var_pred": vp.estimate,
                    "mc_var_pred_se": vp.std_error,
                    "theory_var_pred": k2 * fp,
                    "mc_var_est": ve.estimate,
                    "mc_var_est_se": ve.std_error,
                    "theory_var_est": k2 * fe,
                    "theory_bias2": bias2,
                    "exact_bias2_pred": exact_pred,
                    "asymptotic_bias2": limit.bias2,
                    "iso_reference": k2 * isotropic_s_star(gamma),
                    "s_star": limit.s_star,
                    "asymptotic_var_est": limit.variance,
                    "theory_risk_pred": exact_pred + k2 * fp,
                    "theory_risk_est": bias2 + k2 * fe,
                    "asymptotic_risk_est": limit.limit_risk,
                })
        path = write_csv(cfg.output_path, cfg, self.columns, rows)
        summary = {"rows": len(rows), "gammas": len(gammas), "levels": len(levels), "resampled": resampled}
        logger.info("descent_curve finished: %s", summary)
        return ExperimentResult(
            success=True,
            data=summary,
            generated_files=[{"type": "csv", "path": str(path), "label": self.name}],
        )
