"""Mahalanobis-distance detector: distance to the training mean under the
regularised sample covariance, i.e. a hyper-ellipsoidal ID region."""

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.linalg import solve_triangular

from ..data import Dataset
from .base import register_model

__all__ = ["MahalanobisModel", "fit_mahalanobis"]


@register_model
@dataclass(frozen=True)
class MahalanobisModel:
    mean: np.ndarray
    covariance: np.ndarray  # regularised, SPD
    chol_lower: np.ndarray

    kind = "mahalanobis"

    def score(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.mean.size:
            raise ValueError(f"points must have shape (N, {self.mean.size})")
        z = solve_triangular(self.chol_lower, (pts - self.mean).T, lower=True)
        return np.sqrt(np.sum(z**2, axis=0))

    def _arrays(self):
        return {"mean": self.mean, "covariance": self.covariance, "chol_lower": self.chol_lower}

    def _scalars(self):
        return {}

    @classmethod
    def _rebuild(cls, arrays, scalars):
        return cls(arrays["mean"], arrays["covariance"], arrays["chol_lower"])


def fit_mahalanobis(train: Union[Dataset, np.ndarray]) -> MahalanobisModel:
    """Fit mean and sample covariance; the covariance is ridge-regularised
    with 1e-6 times its mean diagonal so degenerate directions never fail."""
    x = train.points if isinstance(train, Dataset) else np.asarray(train, dtype=float)
    n, d = x.shape
    if n <= d:
        raise ValueError(f"need more training points ({n}) than dimensions ({d})")
    mean = x.mean(axis=0)
    cov = np.atleast_2d(np.cov(x, rowvar=False, ddof=1))
    lam = max(1e-6 * float(np.mean(np.diag(cov))), 1e-12)
    cov_reg = cov + lam * np.eye(d)
    return MahalanobisModel(mean=mean, covariance=cov_reg, chol_lower=np.linalg.cholesky(cov_reg))
