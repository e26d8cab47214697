"""Alignment matrix Gamma(X) between the right-singular vectors of S X^+ and
the eigenvectors of T = Omega^{1/2}.

Var_Sigma(beta_hat | X) = lambda((X^T X)^+ Sigma)^T Gamma(X) lambda(Omega),
both spectra in descending order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from linalg.dense import DEFAULT_RANK_TOL, fsum
from estimator.conditional import sigma_weighted, design_pinv
from models.features import FeatureModel
from models.noise import NoiseCovariance


@dataclass(frozen=True)
class AlignmentMatrix:
    gamma: np.ndarray
    design_spectrum: np.ndarray  # lambda((X^T X)^+ Sigma), first n, descending
    noise_spectrum: np.ndarray  # lambda(Omega), descending

    @property
    def n(self) -> int:
        return self.gamma.shape[0]

    def reconstruct(self) -> float:
        return fsum(self.design_spectrum[:, None] * self.gamma * self.noise_spectrum[None, :])

    def stochastic_deviation(self) -> float:
        """Largest departure of any row or column sum from 1."""
        rows = np.abs(self.gamma.sum(axis=1) - 1.0).max()
        cols = np.abs(self.gamma.sum(axis=0) - 1.0).max()
        return float(max(rows, cols))


def alignment_from_bases(v: np.ndarray, u_t: np.ndarray) -> np.ndarray:
    """gamma_ij = <v_i, u_j>^2 for two orthonormal bases of R^n."""
    return np.square(v.T @ u_t)


def alignment_matrix(x, features: FeatureModel, noise: NoiseCovariance,
                     rank_tol: float = DEFAULT_RANK_TOL) -> AlignmentMatrix:
    b = sigma_weighted(design_pinv(x, rank_tol), features)
    _, d, vt = scipy.linalg.svd(b, full_matrices=False)
    w, u_t = scipy.linalg.eigh(noise.omega)
    order = np.argsort(w)[::-1]
    w, u_t = w[order], u_t[:, order]
    return AlignmentMatrix(
        gamma=alignment_from_bases(vt.T, u_t),
        design_spectrum=np.square(d),
        noise_spectrum=w,
    )
