"""Random generation of every stochastic object in the laboratory."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Protocol

import numpy as np
import scipy.linalg

from linalg.errors import DimensionError, InvalidParameter
from sampler.streams import RandomStream

if TYPE_CHECKING:
    from models.features import FeatureModel
    from models.noise import NoiseCovariance

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray
    beta: np.ndarray
    eps: np.ndarray
    y: np.ndarray

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @property
    def overparameterized(self) -> bool:
        return self.n < self.p


class DesignSampler(Protocol):
    """Any left-spherical design generator: (n, features, rng) -> X[n x p]."""

    def __call__(self, n: int, features: "FeatureModel", rng: RandomStream) -> np.ndarray: ...


def haar_orthogonal(n: int, rng: RandomStream, sign_fix: bool = True) -> np.ndarray:
    """Haar-distributed orthogonal matrix from the QR of a Gaussian matrix.

    The columns of Q are rescaled by sign(diag(R)); without that step the
    result is not Haar. ``sign_fix=False`` exists only as a negative control.
    """
    if n < 1:
        raise InvalidParameter(f"n must be >= 1, got {n}")
    z = rng.gen.standard_normal((n, n))
    q, r = scipy.linalg.qr(z)
    if not sign_fix:
        return q
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d


def gaussian_design(n: int, features: "FeatureModel", rng: RandomStream) -> np.ndarray:
    """Rows i.i.d. N(0, Sigma) as x_i = S z_i."""
    if n < 1:
        raise InvalidParameter(f"n must be >= 1, got {n}")
    z = rng.gen.standard_normal((n, features.p))
    if features.kind == "isotropic":
        return z * np.sqrt(features.scale)
    return z @ features.sqrt


def sample_noise(noise: "NoiseCovariance", rng: RandomStream, size: int | None = None) -> np.ndarray:
    """eps = T z with Cov(eps) = Omega; ``size`` stacks independent draws as rows."""
    shape = (noise.n,) if size is None else (size, noise.n)
    z = rng.gen.standard_normal(shape)
    if noise.kind == "isotropic":
        return z * np.sqrt(noise.params["sigma2"])
    return z @ noise.sqrt  # T symmetric


def sample_beta(p: int, r2: float, rng: RandomStream, size: int | None = None) -> np.ndarray:
    """Random effects beta ~ N(0, (r2/p) I), so E||beta||^2 = r2."""
    if not r2 > 0:
        raise InvalidParameter(f"r2 must be > 0, got {r2}")
    shape = (p,) if size is None else (size, p)
    return rng.gen.standard_normal(shape) * np.sqrt(r2 / p)


def sample_beta_weighted(features: "FeatureModel", r_sigma2: float, rng: RandomStream,
                         size: int | None = None) -> np.ndarray:
    """beta = S^{-1} w with w ~ N(0, (r_sigma2/p) I), so E[S beta (S beta)^T] = r_sigma2 I / p."""
    w = sample_beta(features.p, r_sigma2, rng, size)
    return w @ features.inv_sqrt


def make_dataset(x: np.ndarray, beta: np.ndarray, eps: np.ndarray) -> Dataset:
    x = np.asarray(x, dtype=float)
    beta = np.asarray(beta, dtype=float)
    eps = np.asarray(eps, dtype=float)
    if beta.shape != (x.shape[1],) or eps.shape != (x.shape[0],):
        raise DimensionError(f"inconsistent shapes x{x.shape} beta{beta.shape} eps{eps.shape}")
    return Dataset(x=x, beta=beta, eps=eps, y=x @ beta + eps)


def draw_dataset(n: int, features: "FeatureModel", noise: "NoiseCovariance", r2: float,
                 rng: RandomStream, design: DesignSampler = gaussian_design) -> Dataset:
    if noise.n != n:
        raise DimensionError(f"noise covariance has n={noise.n}, expected {n}")
    x = design(n, features, rng.substream(0))
    beta = sample_beta(features.p, r2, rng.substream(1))
    eps = sample_noise(noise, rng.substream(2))
    return make_dataset(x, beta, eps)
