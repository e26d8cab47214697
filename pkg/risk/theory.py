"""Closed-form risk expressions.

The noise enters the expected variance only through Tr(Omega)/n; the design
factor E_X[Tr((X^T X)^+ Sigma)] has no finite-sample closed form under a
general Sigma and is averaged over the same X draws the Monte Carlo path
uses. The eps-integration is exact, hence "theory".
"""

from __future__ import annotations

import logging

from estimator.conditional import expected_bias2_pred_given_x
from linalg.dense import as_matrix, esd
from linalg.errors import InvalidRegime
from models.features import FeatureModel
from models.noise import NoiseCovariance, trace_over_n
from risk.montecarlo import (
    McConfig,
    McEstimate,
    Target,
    map_designs,
    run_design_pass,
    summarize,
)
from sampler.draws import DesignSampler, gaussian_design

logger = logging.getLogger(__name__)


def design_trace_factor(features: FeatureModel, n: int, cfg: McConfig,
                        target: Target | str = Target.PREDICTION,
                        design: DesignSampler = gaussian_design) -> McEstimate:
    """Ê_X[Tr((X^T X)^+ Sigma)] (prediction) or Ê_X[Tr(Lambda^+)] / p (estimation)."""
    return run_design_pass(features, [], n, cfg, design).trace_factor(Target(target))


def theory_expected_variance(features: FeatureModel, noise: NoiseCovariance, n: int, cfg: McConfig,
                             target: Target | str = Target.PREDICTION,
                             design: DesignSampler = gaussian_design) -> float:
    """(Tr(Omega)/n) * Ê_X[Tr((X^T X)^+ Sigma)], or (1/(np)) Tr(Omega) Ê_X[Tr(Lambda^+)]."""
    factor = design_trace_factor(features, n, cfg, target, design)
    return trace_over_n(noise) * factor.estimate


def theory_bias2(r2_weighted: float, n: int, p: int) -> float:
    """r^2 (p - n) / p: the expected bias depends only on the rank deficiency."""
    if p < n:
        raise InvalidRegime(f"bias formula needs p >= n, got n={n}, p={p}")
    return r2_weighted * (p - n) / p


def theory_bias2_exact_pred(features: FeatureModel, n: int, r_sigma2: float, cfg: McConfig,
                            design: DesignSampler = gaussian_design) -> McEstimate:
    """Ê_X[(r_sigma2 / p) ||S Q S^{-1}||_F^2]; equals theory_bias2 for isotropic Sigma."""
    values, resampled = map_designs(
        lambda x, _i: expected_bias2_pred_given_x(x, features, r_sigma2, cfg.rank_tol),
        features, n, cfg, design,
    )
    return summarize(values, resampled)


def esd_inverse_moment(x) -> float:
    """Integral of 1/s against the empirical spectral distribution of X X^T / n."""
    xm = as_matrix(x, "x")
    return esd(xm @ xm.T / xm.shape[0]).inverse_moment()


def expected_esd_inverse_moment(features: FeatureModel, n: int, cfg: McConfig,
                                design: DesignSampler = gaussian_design) -> McEstimate:
    values, resampled = map_designs(lambda x, _i: esd_inverse_moment(x), features, n, cfg, design)
    return summarize(values, resampled)


def isotropic_trace_oracle(n: int, p: int) -> float:
    """E[Tr((X X^T)^{-1})] = n / (p - n - 1) for Gaussian X with Sigma = I (inverse Wishart)."""
    if p <= n + 1:
        raise InvalidRegime(f"inverse-Wishart mean needs p > n + 1, got n={n}, p={p}")
    return n / (p - n - 1)
