"""Bias/variance assembly of the prediction and estimation risks."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from linalg.errors import InvalidParameter
from models.features import FeatureModel
from models.noise import NoiseCovariance, trace_over_n
from risk.montecarlo import McConfig, McEstimate, Target, agree_within, mc_expected_bias2, run_design_pass
from risk.theory import theory_bias2, theory_bias2_exact_pred
from sampler.draws import DesignSampler, gaussian_design

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RiskReport:
    n: int
    p: int
    r2: float
    r_sigma2: float
    trace_omega_over_n: float
    mc_var_pred: McEstimate
    mc_var_est: McEstimate
    theory_var_pred: float
    theory_var_est: float
    theory_var_pred_se: float
    theory_var_est_se: float
    mc_bias2_pred: McEstimate
    mc_bias2_est: McEstimate
    theory_bias2_pred: float
    theory_bias2_est: float
    exact_bias2_pred: McEstimate

    @property
    def theory_risk_pred(self) -> float:
        return self.theory_bias2_pred + self.theory_var_pred

    @property
    def theory_risk_est(self) -> float:
        return self.theory_bias2_est + self.theory_var_est

    @property
    def mc_risk_pred(self) -> float:
        return self.mc_bias2_pred.estimate + self.mc_var_pred.estimate

    @property
    def mc_risk_est(self) -> float:
        return self.mc_bias2_est.estimate + self.mc_var_est.estimate

    def consistent(self, k: float = 3.0) -> dict[str, bool]:
        """Monte Carlo vs theory agreement per component within k combined SE."""
        return {
            "var_pred": agree_within(self.mc_var_pred, McEstimate(self.theory_var_pred, self.theory_var_pred_se), k),
            "var_est": agree_within(self.mc_var_est, McEstimate(self.theory_var_est, self.theory_var_est_se), k),
            "bias2_pred": agree_within(self.mc_bias2_pred, self.exact_bias2_pred, k),
            "bias2_est": agree_within(self.mc_bias2_est, self.theory_bias2_est, k),
        }

    def to_record(self) -> dict[str, float | int]:
        """Flat record with a fixed key order."""
        return {
            "n": self.n,
            "p": self.p,
            "r2": self.r2,
            "r_sigma2": self.r_sigma2,
            "trace_omega_over_n": self.trace_omega_over_n,
            "mc_var_pred": self.mc_var_pred.estimate,
            "mc_var_pred_se": self.mc_var_pred.std_error,
            "theory_var_pred": self.theory_var_pred,
            "mc_var_est": self.mc_var_est.estimate,
            "mc_var_est_se": self.mc_var_est.std_error,
            "theory_var_est": self.theory_var_est,
            "mc_bias2_pred": self.mc_bias2_pred.estimate,
            "mc_bias2_pred_se": self.mc_bias2_pred.std_error,
            "theory_bias2_pred": self.theory_bias2_pred,
            "exact_bias2_pred": self.exact_bias2_pred.estimate,
            "mc_bias2_est": self.mc_bias2_est.estimate,
            "mc_bias2_est_se": self.mc_bias2_est.std_error,
            "theory_bias2_est": self.theory_bias2_est,
            "theory_risk_pred": self.theory_risk_pred,
            "theory_risk_est": self.theory_risk_est,
            "resampled": self.mc_var_pred.resampled,
        }


def full_report(features: FeatureModel, noise: NoiseCovariance, n: int, p: int, r2: float,
                r_sigma2: float, cfg: McConfig, design: DesignSampler = gaussian_design) -> RiskReport:
    if features.p != p or noise.n != n:
        raise InvalidParameter(f"model dimensions (n={noise.n}, p={features.p}) do not match ({n}, {p})")
    kappa2 = trace_over_n(noise)
    dp = run_design_pass(features, [noise], n, cfg, design)
    if p == n:
        # square designs interpolate every beta: no bias to sample
        logger.info("Square design n=p=%d: bias reported as 0", n)
        zero = McEstimate(0.0, 0.0, cfg.n_x)
        mc_bias2_pred = mc_bias2_est = exact_bias2_pred = zero
    else:
        mc_bias2_pred = mc_expected_bias2(features, n, p, r_sigma2, cfg, Target.PREDICTION, design)
        mc_bias2_est = mc_expected_bias2(features, n, p, r2, cfg, Target.ESTIMATION, design)
        exact_bias2_pred = theory_bias2_exact_pred(features, n, r_sigma2, cfg, design)
    factor_pred = dp.trace_factor(Target.PREDICTION)
    factor_est = dp.trace_factor(Target.ESTIMATION)
    report = RiskReport(
        n=n,
        p=p,
        r2=r2,
        r_sigma2=r_sigma2,
        trace_omega_over_n=kappa2,
        mc_var_pred=dp.variance(0, Target.PREDICTION),
        mc_var_est=dp.variance(0, Target.ESTIMATION),
        theory_var_pred=kappa2 * factor_pred.estimate,
        theory_var_est=kappa2 * factor_est.estimate,
        theory_var_pred_se=kappa2 * factor_pred.std_error,
        theory_var_est_se=kappa2 * factor_est.std_error,
        mc_bias2_pred=mc_bias2_pred,
        mc_bias2_est=mc_bias2_est,
        theory_bias2_pred=theory_bias2(r_sigma2, n, p),
        theory_bias2_est=theory_bias2(r2, n, p),
        exact_bias2_pred=exact_bias2_pred,
    )
    logger.info("Risk report n=%d p=%d: R_P theory %.6g, R_E theory %.6g",
                n, p, report.theory_risk_pred, report.theory_risk_est)
    return report
