"""Regression-error covariances: isotropic, AR(1), clustered and explicit."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Sequence

import numpy as np
import scipy.linalg

from linalg.dense import as_matrix, fsum, is_symmetric, spd_sqrt
from linalg.errors import InvalidParameter, NotSpd

logger = logging.getLogger(__name__)

SPD_RATIO = 1e-12
NOISE_KINDS = ("isotropic", "ar1", "clustered", "explicit")


@dataclass(frozen=True)
class ClusterGroup:
    size: int
    sigma2: float
    rho: float  # within-cluster covariance E[eps_i eps_j], i != j

    def block(self) -> np.ndarray:
        return (self.sigma2 - self.rho) * np.eye(self.size) + self.rho * np.ones((self.size, self.size))


@dataclass(frozen=True, eq=False)
class NoiseCovariance:
    kind: str
    n: int
    omega: np.ndarray = field(repr=False)
    params: dict[str, Any] = field(default_factory=dict)

    @cached_property
    def sqrt(self) -> np.ndarray:
        """T = Omega^{1/2}."""
        if self.kind == "isotropic":
            return np.sqrt(self.params["sigma2"]) * np.eye(self.n)
        return spd_sqrt(self.omega)

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        """Descending."""
        return scipy.linalg.eigvalsh(self.omega)[::-1]

    @property
    def trace(self) -> float:
        return fsum(np.diag(self.omega))


def _check_spd(omega: np.ndarray, what: str, group: int | None = None):
    if not is_symmetric(omega):
        raise NotSpd(f"{what} is not symmetric", group=group)
    w = scipy.linalg.eigvalsh(omega)
    if w[0] <= SPD_RATIO * max(w[-1], 0.0) or w[-1] <= 0.0:
        raise NotSpd(f"{what} is not positive definite (eigenvalues in [{w[0]:.3e}, {w[-1]:.3e}])",
                     group=group)


def build_isotropic(n: int, sigma2: float) -> NoiseCovariance:
    if n < 1:
        raise InvalidParameter(f"n must be >= 1, got {n}")
    if not sigma2 > 0:
        raise InvalidParameter(f"sigma2 must be > 0, got {sigma2}")
    return NoiseCovariance("isotropic", n, float(sigma2) * np.eye(n), {"sigma2": float(sigma2)})


def _ar1(n: int, sigma2: float, rho: float, rho2: float, by_rho2: bool = False) -> NoiseCovariance:
    if n < 1:
        raise InvalidParameter(f"n must be >= 1, got {n}")
    if not sigma2 > 0:
        raise InvalidParameter(f"sigma2 must be > 0, got {sigma2}")
    if not abs(rho) < 1 or not rho2 < 1:
        raise InvalidParameter(f"AR(1) needs |rho| < 1, got rho={rho}")
    col = sigma2 * np.power(rho, np.arange(n, dtype=float)) / (1.0 - rho2)
    omega = scipy.linalg.toeplitz(col)
    _check_spd(omega, "AR(1) covariance")
    params = {"sigma2": float(sigma2), "rho": float(rho), "rho2": float(rho2), "by_rho2": by_rho2}
    return NoiseCovariance("ar1", n, omega, params)


def build_ar1(n: int, sigma2: float, rho: float) -> NoiseCovariance:
    """Omega_ij = sigma2 * rho^|i-j| / (1 - rho^2)."""
    return _ar1(n, sigma2, rho, rho * rho)


def build_ar1_rho2(n: int, sigma2: float, rho2: float, negative: bool = False) -> NoiseCovariance:
    """AR(1) parametrised by rho^2, keeping rho^2 exact in the stationary variance."""
    if not 0 <= rho2 < 1:
        raise InvalidParameter(f"AR(1) needs 0 <= rho^2 < 1, got {rho2}")
    rho = -np.sqrt(rho2) if negative else np.sqrt(rho2)
    return _ar1(n, sigma2, float(rho), float(rho2), by_rho2=True)


def build_clustered(groups: Sequence[ClusterGroup | tuple[int, float, float]]) -> NoiseCovariance:
    """Block-diagonal equicorrelated clusters; each block must be PD."""
    parsed = [g if isinstance(g, ClusterGroup) else ClusterGroup(int(g[0]), float(g[1]), float(g[2]))
              for g in groups]
    if not parsed:
        raise InvalidParameter("clustered covariance needs at least one group")
    for idx, g in enumerate(parsed):
        if g.size < 1:
            raise InvalidParameter(f"group {idx}: size must be >= 1, got {g.size}")
        if not g.sigma2 > 0:
            raise NotSpd(f"group {idx}: sigma2 must be > 0, got {g.sigma2}", group=idx)
        # eigenvalues sigma2 - rho (mult. n_g - 1) and sigma2 + (n_g - 1) rho
        if g.size > 1 and not (-g.sigma2 / (g.size - 1) < g.rho < g.sigma2):
            raise NotSpd(
                f"group {idx}: rho={g.rho} outside ({-g.sigma2 / (g.size - 1):.6g}, {g.sigma2:.6g})",
                group=idx,
            )
    omega = scipy.linalg.block_diag(*(g.block() for g in parsed))
    _check_spd(omega, "clustered covariance")
    return NoiseCovariance("clustered", omega.shape[0], omega, {"groups": parsed})


def build_explicit_noise(matrix) -> NoiseCovariance:
    omega = as_matrix(matrix, "omega")
    if omega.shape[0] != omega.shape[1]:
        raise NotSpd(f"omega must be square, got {omega.shape}")
    _check_spd(omega, "explicit covariance")
    omega = 0.5 * (omega + omega.T)
    return NoiseCovariance("explicit", omega.shape[0], omega, {})


def trace_over_n(noise: NoiseCovariance) -> float:
    return noise.trace / noise.n
