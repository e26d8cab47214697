"""Limiting estimation risk for p/n -> gamma > 1.

s* is the z -> 0 limit (along the real axis) of the Stieltjes transform of the
limiting spectral distribution of X X^T / n, the unique root of

    1 - 1/gamma = integral 1 / (1 + tau s) dH(tau).

The root is bracketed by mu_H^{-1}/(gamma-1) <= s* <= c_H^{-1}/(gamma-1) and
found by bisection.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
import scipy.optimize

from linalg.dense import fsum
from linalg.errors import InvalidParameter, InvalidRegime
from models.features import FeatureModel

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12
MAX_ITER = 200
BRACKET_PAD = 1e-6
WEIGHT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SpectrumMeasure:
    """Discrete probability measure H = sum_i w_i delta_{tau_i}."""

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float).ravel()
        weights = np.asarray(self.weights, dtype=float).ravel()
        if atoms.size == 0 or atoms.shape != weights.shape:
            raise InvalidParameter("atoms and weights must be non-empty and of equal length")
        if not np.all(np.isfinite(atoms)) or np.any(atoms <= 0.0):
            raise InvalidParameter("all atoms must be finite and strictly positive")
        if np.any(weights <= 0.0):
            raise InvalidParameter("all weights must be strictly positive")
        if abs(fsum(weights) - 1.0) > WEIGHT_TOL:
            raise InvalidParameter(f"weights sum to {fsum(weights)!r}, expected 1")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def point_mass(cls, tau: float = 1.0) -> "SpectrumMeasure":
        return cls(np.array([tau]), np.array([1.0]))

    @classmethod
    def from_atoms(cls, atoms: Sequence[float], weights: Sequence[float] | None = None) -> "SpectrumMeasure":
        atoms = np.asarray(atoms, dtype=float)
        if weights is None:
            weights = np.full(atoms.size, 1.0 / atoms.size)
        return cls(atoms, np.asarray(weights, dtype=float))

    @classmethod
    def from_eigenvalues(cls, eigenvalues: Sequence[float]) -> "SpectrumMeasure":
        """Empirical spectral distribution of Sigma: weight 1/p per eigenvalue."""
        return cls.from_atoms(eigenvalues)

    @classmethod
    def from_features(cls, features: FeatureModel) -> "SpectrumMeasure":
        return cls.from_eigenvalues(features.eigenvalues)

    @property
    def support_min(self) -> float:
        return float(self.atoms.min())

    @property
    def support_max(self) -> float:
        return float(self.atoms.max())

    @property
    def mean(self) -> float:
        return fsum(self.weights * self.atoms)


class StarBounds(NamedTuple):
    lower: float  # C_H^{-1} (gamma - 1)^{-1}
    upper: float  # c_H^{-1} (gamma - 1)^{-1}
    tight_lower: float  # mu_H^{-1} (gamma - 1)^{-1}


@dataclass(frozen=True)
class AsymptoticResult:
    gamma: float
    s_star: float
    limit_risk: float
    kappa2: float
    r2: float

    @property
    def bias2(self) -> float:
        return self.r2 * (1.0 - 1.0 / self.gamma)

    @property
    def variance(self) -> float:
        return self.s_star * self.kappa2


def stieltjes_rhs(h: SpectrumMeasure, s: float) -> float:
    """integral 1 / (1 + tau s) dH(tau); strictly decreasing on s > 0."""
    if not s > 0:
        raise InvalidParameter(f"s must be > 0, got {s}")
    return fsum(h.weights / (1.0 + h.atoms * s))


def _check_gamma(gamma: float):
    if not gamma > 1:
        raise InvalidRegime(f"overparameterized limit needs gamma > 1, got {gamma}")


def s_star_bounds(h: SpectrumMeasure, gamma: float) -> StarBounds:
    _check_gamma(gamma)
    iso = 1.0 / (gamma - 1.0)
    return StarBounds(lower=iso / h.support_max, upper=iso / h.support_min, tight_lower=iso / h.mean)


def isotropic_s_star(gamma: float) -> float:
    _check_gamma(gamma)
    return 1.0 / (gamma - 1.0)


def solve_s_star(h: SpectrumMeasure, gamma: float, tol: float = DEFAULT_TOL) -> float:
    _check_gamma(gamma)
    target = 1.0 - 1.0 / gamma
    bounds = s_star_bounds(h, gamma)
    lo = bounds.tight_lower * (1.0 - BRACKET_PAD)
    hi = bounds.upper * (1.0 + BRACKET_PAD)

    def f(s: float) -> float:
        return stieltjes_rhs(h, s) - target

    # |f'| <= mu_H, so this x-tolerance keeps the residual below tol
    xtol = tol / (2.0 * h.mean)
    root, info = scipy.optimize.bisect(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps,
                                       maxiter=MAX_ITER, full_output=True, disp=False)
    if not info.converged:
        logger.warning("Bisection for s* did not converge (gamma=%g, %d iterations)", gamma, info.iterations)
    logger.debug("s*(gamma=%g) = %.17g after %d iterations", gamma, root, info.iterations)
    residual = abs(f(root))
    if residual >= tol:
        logger.warning("s* residual %.3e exceeds tolerance %.1e (gamma=%g)", residual, tol, gamma)
    return float(root)


def limit_estimation_risk(r2: float, kappa2: float, gamma: float, h: SpectrumMeasure,
                          tol: float = DEFAULT_TOL) -> AsymptoticResult:
    """R_E -> r2 (1 - 1/gamma) + s* kappa2, kappa2 = lim Tr(Omega)/n."""
    if r2 < 0 or kappa2 < 0:
        raise InvalidParameter(f"r2 and kappa2 must be non-negative, got {r2}, {kappa2}")
    s = solve_s_star(h, gamma, tol)
    return AsymptoticResult(
        gamma=float(gamma),
        s_star=s,
        limit_risk=r2 * (1.0 - 1.0 / gamma) + s * kappa2,
        kappa2=float(kappa2),
        r2=float(r2),
    )


def limit_risk_curve(r2: float, kappa2: float, gammas: Sequence[float], h: SpectrumMeasure,
                     tol: float = DEFAULT_TOL) -> list[AsymptoticResult]:
    return [limit_estimation_risk(r2, kappa2, g, h, tol) for g in gammas]
