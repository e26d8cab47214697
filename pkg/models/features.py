"""Feature covariances Sigma: isotropic, Haar-rotated random spectrum, explicit."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np
import scipy.linalg

from linalg.dense import as_matrix, is_symmetric, spd_inv_sqrt, spd_sqrt
from linalg.errors import InvalidParameter, NotSpd
from sampler.draws import haar_orthogonal
from sampler.streams import RandomStream

logger = logging.getLogger(__name__)

FEATURE_KINDS = ("isotropic", "haar_spectrum", "explicit")
_MIN_ATOM = 1e-300


@dataclass(frozen=True, eq=False)
class FeatureModel:
    kind: str
    p: int
    sigma: np.ndarray = field(repr=False)
    scale: float = 1.0
    basis: np.ndarray | None = field(default=None, repr=False)  # U_Sigma
    spectrum: np.ndarray | None = field(default=None, repr=False)  # diag of D_Sigma
    params: dict[str, Any] = field(default_factory=dict)

    @cached_property
    def sqrt(self) -> np.ndarray:
        """S = Sigma^{1/2}."""
        if self.kind == "isotropic":
            return np.sqrt(self.scale) * np.eye(self.p)
        if self.basis is not None:
            s = (self.basis * np.sqrt(self.spectrum)) @ self.basis.T
            return 0.5 * (s + s.T)
        return spd_sqrt(self.sigma)

    @cached_property
    def inv_sqrt(self) -> np.ndarray:
        if self.kind == "isotropic":
            return np.eye(self.p) / np.sqrt(self.scale)
        if self.basis is not None:
            s = (self.basis / np.sqrt(self.spectrum)) @ self.basis.T
            return 0.5 * (s + s.T)
        return spd_inv_sqrt(self.sigma)

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        """Ascending."""
        if self.spectrum is not None:
            return np.sort(self.spectrum)
        return scipy.linalg.eigvalsh(self.sigma)

    @property
    def is_isotropic(self) -> bool:
        return self.kind == "isotropic"


def build_isotropic_features(p: int, scale: float = 1.0) -> FeatureModel:
    if p < 1:
        raise InvalidParameter(f"p must be >= 1, got {p}")
    if not scale > 0:
        raise InvalidParameter(f"scale must be > 0, got {scale}")
    return FeatureModel("isotropic", p, scale * np.eye(p), scale=float(scale),
                        spectrum=np.full(p, float(scale)))


def build_sigma_haar_spectrum(p: int, rng: RandomStream, scale: float = 1.0) -> FeatureModel:
    """Sigma = U D U^T, U Haar on O(p), d_i = |z_i| / sum |z_j| (times ``scale``)."""
    if p < 1:
        raise InvalidParameter(f"p must be >= 1, got {p}")
    if not scale > 0:
        raise InvalidParameter(f"scale must be > 0, got {scale}")
    while True:
        z = np.abs(rng.gen.standard_normal(p))
        d = z / z.sum()
        if d.min() >= _MIN_ATOM:
            break
        logger.warning("Degenerate spectrum atom drawn; redrawing")
    d = d * scale
    u = haar_orthogonal(p, rng)
    sigma = (u * d) @ u.T
    sigma = 0.5 * (sigma + sigma.T)
    return FeatureModel("haar_spectrum", p, sigma, scale=float(scale), basis=u, spectrum=d,
                        params={"seed": rng.seed, "stream_id": rng.stream_id})


def build_explicit_features(matrix) -> FeatureModel:
    sigma = as_matrix(matrix, "sigma")
    if sigma.shape[0] != sigma.shape[1] or not is_symmetric(sigma):
        raise NotSpd("sigma must be square and symmetric")
    sigma = 0.5 * (sigma + sigma.T)
    w = scipy.linalg.eigvalsh(sigma)
    if w[0] <= 0.0:
        raise NotSpd(f"sigma is not positive definite (min eigenvalue {w[0]:.3e})")
    return FeatureModel("explicit", sigma.shape[0], sigma)
