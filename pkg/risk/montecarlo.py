"""Monte Carlo estimation of expected (over X, eps, beta) risk components.

Every X replicate i owns the substreams ``(seed, DESIGN, i, attempt)``,
``(seed, NOISE, i)`` and ``(seed, BETA, i)``; the same seed therefore yields
the same designs for every noise model, which is what makes paired
comparisons across covariances exact. Replicates run on a thread pool and
are reduced in index order.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence, TypeVar

import numpy as np

from estimator.conditional import design_pinv, sigma_weighted
from linalg.dense import DEFAULT_RANK_TOL, fsum, require_full_row_rank
from linalg.errors import InvalidParameter, InvalidRegime, RankDeficient, TooManyResamples
from models.features import FeatureModel
from models.noise import NoiseCovariance
from sampler.draws import DesignSampler, gaussian_design, sample_beta, sample_beta_weighted
from sampler.streams import RandomStream

logger = logging.getLogger(__name__)

STREAM_DESIGN = 0
STREAM_NOISE = 1
STREAM_BETA = 2
MAX_ATTEMPTS = 16

T = TypeVar("T")


class Target(str, Enum):
    PREDICTION = "prediction"
    ESTIMATION = "estimation"


@dataclass(frozen=True)
class McConfig:
    n_x: int = 100
    n_eps: int = 100
    n_beta: int = 100
    seed: int = 0
    empirical_cov: bool = False
    threads: int = 1
    rank_tol: float = DEFAULT_RANK_TOL
    max_resample_fraction: float = 0.01

    def __post_init__(self):
        for name in ("n_x", "n_eps", "n_beta"):
            if getattr(self, name) < 2:
                raise InvalidParameter(f"{name} must be >= 2, got {getattr(self, name)}")
        if self.threads < 1:
            raise InvalidParameter(f"threads must be >= 1, got {self.threads}")

    @classmethod
    def from_dict(cls, d: dict) -> "McConfig":
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        return cls(**known)


@dataclass(frozen=True)
class McEstimate:
    estimate: float
    std_error: float
    n_draws: int = 0
    resampled: int = 0

    def as_tuple(self) -> tuple[float, float]:
        return self.estimate, self.std_error

    def scaled(self, factor: float) -> "McEstimate":
        return McEstimate(self.estimate * factor, self.std_error * abs(factor), self.n_draws, self.resampled)


def summarize(values: Sequence[float] | np.ndarray, resampled: int = 0) -> McEstimate:
    """Mean with the across-replicate standard error sd / sqrt(N)."""
    v = np.asarray(values, dtype=float)
    n = v.size
    mean = fsum(v) / n
    var = fsum(np.square(v - mean)) / (n - 1) if n > 1 else 0.0
    return McEstimate(mean, math.sqrt(var / n), n, resampled)


def agree_within(a: McEstimate, b: McEstimate | float, k: float = 3.0) -> bool:
    """|a - b| <= k * combined standard error."""
    if isinstance(b, McEstimate):
        se = math.hypot(a.std_error, b.std_error)
        return abs(a.estimate - b.estimate) <= k * se
    return abs(a.estimate - b) <= k * a.std_error


# --------------------------------------------------------------------------- #
# Replicate driver
# --------------------------------------------------------------------------- #

def map_designs(fn: Callable[[np.ndarray, int], T], features: FeatureModel, n: int, cfg: McConfig,
                design: DesignSampler = gaussian_design) -> tuple[list[T], int]:
    """Evaluate ``fn(X_i, i)`` on N_X design draws, resampling rank-deficient ones."""
    if n > features.p:
        raise InvalidRegime(f"need n <= p, got n={n}, p={features.p}")
    root = RandomStream(cfg.seed)

    def work(i: int) -> tuple[T, int]:
        for attempt in range(MAX_ATTEMPTS):
            x = design(n, features, root.substream(STREAM_DESIGN, i, attempt))
            try:
                return fn(x, i), attempt
            except RankDeficient:
                logger.warning("Design draw %d (attempt %d) rank deficient; resampling", i, attempt)
        raise TooManyResamples(f"design draw {i} rank deficient after {MAX_ATTEMPTS} attempts")

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(work, range(cfg.n_x)))
    else:
        results = [work(i) for i in range(cfg.n_x)]

    resampled = sum(a for _, a in results)
    if resampled > cfg.max_resample_fraction * cfg.n_x:
        raise TooManyResamples(f"{resampled} of {cfg.n_x} design draws were rank deficient")
    if resampled:
        logger.info("Resampled %d rank-deficient design draws", resampled)
    return [r for r, _ in results], resampled


# --------------------------------------------------------------------------- #
# Variance pass
# --------------------------------------------------------------------------- #

@dataclass
class DesignPass:
    """Per-replicate quantities from one sweep over the X draws.

    ``var_pred[i, k]`` / ``var_est[i, k]`` hold the conditional variances of
    replicate i under noise model k.
    """

    trace_pred: np.ndarray  # Tr((X^T X)^+ Sigma)
    trace_est: np.ndarray  # Tr((X X^T)^{-1}) via the eigenvalues of X X^T / p
    var_pred: np.ndarray
    var_est: np.ndarray
    resampled: int = 0
    noises: list[NoiseCovariance] = field(default_factory=list)

    def variance(self, k: int, target: Target) -> McEstimate:
        col = self.var_pred[:, k] if target is Target.PREDICTION else self.var_est[:, k]
        return summarize(col, self.resampled)

    def trace_factor(self, target: Target) -> McEstimate:
        col = self.trace_pred if target is Target.PREDICTION else self.trace_est
        return summarize(col, self.resampled)


def _empirical_variances(x, pinv, features, noises, cfg, i):
    """Trace of the empirical covariance of beta_hat over N_eps noise draws."""
    root = RandomStream(cfg.seed)
    z = root.substream(STREAM_NOISE, i).gen.standard_normal((cfg.n_eps, x.shape[0]))
    beta = sample_beta(x.shape[1], 1.0, root.substream(STREAM_BETA, i))
    signal = x @ beta
    out_pred, out_est = [], []
    for noise in noises:
        eps = z * np.sqrt(noise.params["sigma2"]) if noise.kind == "isotropic" else z @ noise.sqrt
        b_hat = (signal[None, :] + eps) @ pinv.T
        centred = b_hat - b_hat.mean(axis=0)
        weighted = sigma_weighted(centred.T, features).T
        out_pred.append(fsum(np.square(weighted)) / (cfg.n_eps - 1))
        out_est.append(fsum(np.square(centred)) / (cfg.n_eps - 1))
    return out_pred, out_est


def run_design_pass(features: FeatureModel, noises: Sequence[NoiseCovariance], n: int, cfg: McConfig,
                    design: DesignSampler = gaussian_design) -> DesignPass:
    """One pass over the X draws serving every noise model and both targets."""
    noises = list(noises)
    for noise in noises:
        if noise.n != n:
            raise InvalidParameter(f"noise covariance has n={noise.n}, expected {n}")
    p = features.p

    def per_design(x: np.ndarray, i: int):
        pinv = design_pinv(x, cfg.rank_tol)
        b = sigma_weighted(pinv, features)
        m_pred = b.T @ b  # X^+T Sigma X^+
        m_est = pinv.T @ pinv
        lam = np.linalg.eigvalsh(x @ x.T / p)
        if lam[0] <= 0.0:
            raise RankDeficient("X X^T is singular")
        trace_est = fsum(1.0 / lam) / p
        trace_pred = fsum(np.diag(m_pred))
        if cfg.empirical_cov:
            vp, ve = _empirical_variances(x, pinv, features, noises, cfg, i)
        else:
            vp = [fsum(m_pred * nz.omega) for nz in noises]
            ve = [fsum(m_est * nz.omega) for nz in noises]
        return trace_pred, trace_est, vp, ve

    rows, resampled = map_designs(per_design, features, n, cfg, design)
    k = len(noises)
    return DesignPass(
        trace_pred=np.array([r[0] for r in rows]),
        trace_est=np.array([r[1] for r in rows]),
        var_pred=np.array([r[2] for r in rows]).reshape(cfg.n_x, k),
        var_est=np.array([r[3] for r in rows]).reshape(cfg.n_x, k),
        resampled=resampled,
        noises=noises,
    )


def mc_expected_variance(features: FeatureModel, noise: NoiseCovariance, n: int, cfg: McConfig,
                         target: Target | str = Target.PREDICTION,
                         design: DesignSampler = gaussian_design) -> McEstimate:
    """E_X[Var_A(beta_hat | X)], A = Sigma (prediction) or I (estimation)."""
    target = Target(target)
    return run_design_pass(features, [noise], n, cfg, design).variance(0, target)


# --------------------------------------------------------------------------- #
# Bias pass
# --------------------------------------------------------------------------- #

def mc_expected_bias2(features: FeatureModel, n: int, p: int, r2: float, cfg: McConfig,
                      target: Target | str = Target.ESTIMATION,
                      design: DesignSampler = gaussian_design,
                      beta_sampler: Callable[[np.ndarray, RandomStream], np.ndarray] | None = None) -> McEstimate:
    """E_{X,beta}[Bias_A^2(beta_hat | X)] over N_X designs and N_beta draws each.

    Estimation draws beta ~ N(0, r2 I / p); prediction draws beta = S^{-1} w with
    w ~ N(0, r2 I / p). ``beta_sampler(x, rng)`` overrides both and must return
    an (N_beta, p) array.
    """
    target = Target(target)
    if features.p != p:
        raise InvalidParameter(f"features have p={features.p}, expected {p}")
    if p <= n:
        raise InvalidRegime(f"bias pass needs p > n, got n={n}, p={p}")
    root = RandomStream(cfg.seed)
    weight = features if target is Target.PREDICTION else None

    def per_design(x: np.ndarray, i: int) -> float:
        rng = root.substream(STREAM_BETA, i)
        if beta_sampler is not None:
            betas = beta_sampler(x, rng)
        elif target is Target.PREDICTION:
            betas = sample_beta_weighted(features, r2, rng, size=cfg.n_beta)
        else:
            betas = sample_beta(p, r2, rng, size=cfg.n_beta)
        f = require_full_row_rank(x, cfg.rank_tol)
        v = f.v
        resid = betas - (betas @ v) @ v.T
        if weight is not None:
            resid = sigma_weighted(resid.T, weight).T
        return fsum(np.square(resid)) / betas.shape[0]

    values, resampled = map_designs(per_design, features, n, cfg, design)
    return summarize(values, resampled)
