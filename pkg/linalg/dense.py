"""Dense linear-algebra kernel.

Thin SVD, Moore-Penrose pseudoinverse, minimum-norm solves, SPD square roots
and empirical spectral distributions. Every function is pure; inputs are
validated and never modified in place.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from linalg.errors import DimensionError, InvalidMatrix, NotSpd, NotSymmetric, RankDeficient

logger = logging.getLogger(__name__)

DEFAULT_RANK_TOL = 1e-12
SYMMETRY_TOL = 1e-10


# --------------------------------------------------------------------------- #
# Containers
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class SvdFactors:
    u: np.ndarray
    singular_values: np.ndarray  # descending
    v: np.ndarray
    numerical_rank: int

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.singular_values) @ self.v.T


@dataclass(frozen=True)
class SpectralDistribution:
    """F^A(s) = (1/normalization) * #{i : lambda_i <= s}."""

    eigenvalues: np.ndarray  # ascending
    normalization: int

    def cdf(self, s: float) -> float:
        count = int(np.searchsorted(self.eigenvalues, s, side="right"))
        return count / self.normalization

    def mean(self) -> float:
        return fsum(self.eigenvalues) / self.normalization

    def inverse_moment(self) -> float:
        """Integral of 1/s against the distribution; all atoms must be positive."""
        if self.eigenvalues.size and self.eigenvalues[0] <= 0.0:
            raise NotSpd("inverse moment needs strictly positive eigenvalues")
        return fsum(1.0 / self.eigenvalues) / self.normalization


# --------------------------------------------------------------------------- #
# Helpers
# --------------------------------------------------------------------------- #

def fsum(values) -> float:
    """Compensated sum of every entry of an array."""
    return math.fsum(np.asarray(values, dtype=float).ravel().tolist())


def frobenius_sq(a: np.ndarray) -> float:
    return fsum(np.square(a))


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    m = np.asarray(a, dtype=float)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] == 0:
        raise InvalidMatrix(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidMatrix(f"{name} has non-finite entries")
    return m


def is_symmetric(m: np.ndarray, tol: float = SYMMETRY_TOL) -> bool:
    if m.shape[0] != m.shape[1]:
        return False
    scale = max(1.0, float(np.max(np.abs(m))))
    return float(np.max(np.abs(m - m.T))) <= tol * scale


def rank_cutoff(singular_values: np.ndarray, shape: tuple[int, int], rank_tol: float) -> float:
    if singular_values.size == 0:
        return 0.0
    return rank_tol * float(singular_values[0]) * max(shape)


# --------------------------------------------------------------------------- #
# Operations
# --------------------------------------------------------------------------- #

def svd_thin(a, rank_tol: float = DEFAULT_RANK_TOL) -> SvdFactors:
    m = as_matrix(a)
    u, s, vt = scipy.linalg.svd(m, full_matrices=False, lapack_driver="gesdd")
    rank = int(np.count_nonzero(s > rank_cutoff(s, m.shape, rank_tol)))
    return SvdFactors(u=u, singular_values=s, v=vt.T, numerical_rank=rank)


def numerical_rank(a, rank_tol: float = DEFAULT_RANK_TOL) -> int:
    m = as_matrix(a)
    s = scipy.linalg.svdvals(m)
    return int(np.count_nonzero(s > rank_cutoff(s, m.shape, rank_tol)))


def pseudo_inverse(a, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Moore-Penrose inverse via the thin SVD with a relative rank cutoff."""
    if rank_tol < 0:
        raise ValueError("rank_tol must be non-negative")
    f = svd_thin(a, rank_tol)
    r = f.numerical_rank
    if r == 0:
        return np.zeros((f.v.shape[0], f.u.shape[0]))
    return (f.v[:, :r] / f.singular_values[:r]) @ f.u[:, :r].T


def min_norm_solve(x, y, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """argmin{||b|| : Xb = y} (least squares when the system is inconsistent)."""
    xm = as_matrix(x, "x")
    yv = np.asarray(y, dtype=float)
    if yv.ndim != 1 or yv.shape[0] != xm.shape[0]:
        raise DimensionError(f"y has shape {yv.shape}, expected ({xm.shape[0]},)")
    f = svd_thin(xm, rank_tol)
    r = f.numerical_rank
    coef = (f.u[:, :r].T @ yv) / f.singular_values[:r]
    return f.v[:, :r] @ coef


def spd_sqrt(m) -> np.ndarray:
    """Symmetric square root through the eigendecomposition."""
    a = as_matrix(m)
    if not is_symmetric(a):
        raise NotSpd("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    w, q = scipy.linalg.eigh(a)
    if w[0] <= 0.0:
        raise NotSpd(f"matrix is not positive definite (min eigenvalue {w[0]:.3e})")
    r = (q * np.sqrt(w)) @ q.T
    return 0.5 * (r + r.T)


def spd_inv_sqrt(m) -> np.ndarray:
    a = as_matrix(m)
    if not is_symmetric(a):
        raise NotSpd("matrix is not symmetric")
    w, q = scipy.linalg.eigh(0.5 * (a + a.T))
    if w[0] <= 0.0:
        raise NotSpd(f"matrix is not positive definite (min eigenvalue {w[0]:.3e})")
    r = (q / np.sqrt(w)) @ q.T
    return 0.5 * (r + r.T)


def esd(a) -> SpectralDistribution:
    m = as_matrix(a)
    if not is_symmetric(m):
        raise NotSymmetric("empirical spectral distribution needs a symmetric matrix")
    vals = scipy.linalg.eigvalsh(0.5 * (m + m.T))
    # round-off below zero on PSD input
    floor = SYMMETRY_TOL * max(1.0, float(np.max(np.abs(vals))))
    vals = np.where((vals < 0.0) & (vals > -floor), 0.0, vals)
    return SpectralDistribution(eigenvalues=np.sort(vals), normalization=m.shape[0])


def require_full_row_rank(x: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> SvdFactors:
    f = svd_thin(x, rank_tol)
    n = x.shape[0]
    if f.numerical_rank < n:
        raise RankDeficient(f"rank(X) = {f.numerical_rank} < n = {n}", rank=f.numerical_rank, expected=n)
    return f


def trace_weighted_pinv(x, sigma, rank_tol: float = DEFAULT_RANK_TOL) -> float:
    """Tr((X^T X)^+ Sigma) for a full-row-rank design."""
    xm = as_matrix(x, "x")
    sm = as_matrix(sigma, "sigma")
    if sm.shape != (xm.shape[1], xm.shape[1]):
        raise DimensionError(f"sigma has shape {sm.shape}, expected {(xm.shape[1],) * 2}")
    f = require_full_row_rank(xm, rank_tol)
    pinv = (f.v / f.singular_values) @ f.u.T
    return max(fsum((sm @ pinv) * pinv), 0.0)
