"""Quantities conditional on the design X for the ridgeless estimator X^+ y.

Null-space limits are evaluated as exact projections built from the thin SVD
of X, never by a small ridge penalty.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from linalg.dense import (
    DEFAULT_RANK_TOL,
    as_matrix,
    frobenius_sq,
    fsum,
    min_norm_solve,
    require_full_row_rank,
    svd_thin,
)
from linalg.errors import DimensionError
from models.features import FeatureModel
from models.noise import NoiseCovariance

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConditionalRisk:
    var_pred: float
    var_est: float
    bias2_pred: float
    bias2_est: float

    @property
    def risk_pred(self) -> float:
        return self.bias2_pred + self.var_pred

    @property
    def risk_est(self) -> float:
        return self.bias2_est + self.var_est


def fit(x, y, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Minimum-norm interpolator beta_hat = X^+ y."""
    return min_norm_solve(x, y, rank_tol)


def design_pinv(x, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """X^+ for a full-row-rank X; raises RankDeficient otherwise."""
    f = require_full_row_rank(as_matrix(x, "x"), rank_tol)
    return (f.v / f.singular_values) @ f.u.T


def sigma_weighted(pinv: np.ndarray, features: FeatureModel | None) -> np.ndarray:
    if features is None:
        return pinv
    if features.p != pinv.shape[0]:
        raise DimensionError(f"features have p={features.p}, design has p={pinv.shape[0]}")
    if features.is_isotropic:
        return np.sqrt(features.scale) * pinv
    return features.sqrt @ pinv


def omega_weighted(m: np.ndarray, noise: NoiseCovariance) -> np.ndarray:
    if noise.n != m.shape[1]:
        raise DimensionError(f"noise has n={noise.n}, design has n={m.shape[1]}")
    if noise.kind == "isotropic":
        return np.sqrt(noise.params["sigma2"]) * m
    return m @ noise.sqrt


def var_pred_conditional(x, noise: NoiseCovariance, features: FeatureModel,
                         rank_tol: float = DEFAULT_RANK_TOL) -> float:
    """Var_Sigma(beta_hat | X) = ||S X^+ T||_F^2."""
    pinv = design_pinv(x, rank_tol)
    return max(frobenius_sq(omega_weighted(sigma_weighted(pinv, features), noise)), 0.0)


def var_est_conditional(x, noise: NoiseCovariance, rank_tol: float = DEFAULT_RANK_TOL) -> float:
    """Var(beta_hat | X) = ||X^+ T||_F^2."""
    pinv = design_pinv(x, rank_tol)
    return max(frobenius_sq(omega_weighted(pinv, noise)), 0.0)


def null_space_residual(x, beta, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """(I - X^+ X) beta: the part of beta the interpolator cannot recover."""
    xm = as_matrix(x, "x")
    b = np.asarray(beta, dtype=float)
    if b.shape != (xm.shape[1],):
        raise DimensionError(f"beta has shape {b.shape}, expected ({xm.shape[1]},)")
    f = svd_thin(xm, rank_tol)
    v = f.v[:, : f.numerical_rank]
    return b - v @ (v.T @ b)


def bias2_conditional(x, beta, features: FeatureModel | None = None,
                      rank_tol: float = DEFAULT_RANK_TOL) -> float:
    """||(I - X^+ X) beta||_A^2 with A = Sigma (features given) or the identity."""
    r = null_space_residual(x, beta, rank_tol)
    if features is None:
        return max(fsum(r * r), 0.0)
    sr = sigma_weighted(r[:, None], features)[:, 0]
    return max(fsum(sr * sr), 0.0)


def expected_bias2_est_given_x(x, r2: float, rank_tol: float = DEFAULT_RANK_TOL) -> float:
    """E_beta[Bias^2 | X] under E[beta beta^T] = r2 I / p: r2 * (p - rank) / p."""
    xm = as_matrix(x, "x")
    p = xm.shape[1]
    rank = svd_thin(xm, rank_tol).numerical_rank
    return r2 * (p - rank) / p


def expected_bias2_pred_given_x(x, features: FeatureModel, r_sigma2: float,
                                rank_tol: float = DEFAULT_RANK_TOL) -> float:
    """E_beta[Bias_Sigma^2 | X] under E[S beta (S beta)^T] = r_sigma2 I / p.

    Equals (r_sigma2 / p) * ||S Q S^{-1}||_F^2 with Q the null-space projector,
    i.e. (r_sigma2 / p) * (p - 2r + Tr(V^T Sigma V V^T Sigma^{-1} V)).
    Reduces to r_sigma2 (p - r) / p when Sigma commutes with Q.
    """
    xm = as_matrix(x, "x")
    p = xm.shape[1]
    f = svd_thin(xm, rank_tol)
    r = f.numerical_rank
    v = f.v[:, :r]
    if features.is_isotropic:
        return r_sigma2 * (p - r) / p
    a = features.sqrt @ v
    b = features.inv_sqrt @ v
    cross = fsum((a.T @ a) * (b.T @ b))
    return r_sigma2 * (p - 2 * r + cross) / p


def conditional_risk(x, beta, noise: NoiseCovariance, features: FeatureModel,
                     rank_tol: float = DEFAULT_RANK_TOL) -> ConditionalRisk:
    return ConditionalRisk(
        var_pred=var_pred_conditional(x, noise, features, rank_tol),
        var_est=var_est_conditional(x, noise, rank_tol),
        bias2_pred=bias2_conditional(x, beta, features, rank_tol),
        bias2_est=bias2_conditional(x, beta, None, rank_tol),
    )
