"""Truncated-PCA detector: reconstruction error after projecting the
standardized input onto the leading principal subspace of the training
data.  Zero-variance features are centered but never scaled, so they
contribute their raw deviation to the error without blowing up."""

from dataclasses import dataclass

import numpy as np

from ..data import Dataset, Standardizer
from .base import register_model, standardizer_arrays, standardizer_from_arrays

__all__ = ["PcaTruncModel", "fit_pca_trunc"]


@register_model
@dataclass(frozen=True)
class PcaTruncModel:
    components: np.ndarray  # (m, D) orthonormal rows
    explained_fraction: float
    standardizer: Standardizer

    kind = "pca_trunc"

    def score(self, points) -> np.ndarray:
        z = self.standardizer.transform(np.asarray(points, dtype=float))
        resid = z - (z @ self.components.T) @ self.components
        return np.sum(resid**2, axis=1)

    def _arrays(self):
        return {"components": self.components, **standardizer_arrays(self.standardizer)}

    def _scalars(self):
        return {"explained_fraction": self.explained_fraction}

    @classmethod
    def _rebuild(cls, arrays, scalars):
        return cls(
            components=arrays["components"],
            explained_fraction=float(scalars["explained_fraction"]),
            standardizer=standardizer_from_arrays(arrays),
        )


def fit_pca_trunc(train: Dataset, variance_threshold: float = 0.95) -> PcaTruncModel:
    """Retain the smallest number of principal components explaining at
    least ``variance_threshold`` of the standardized training variance."""
    if not 0 < variance_threshold < 1:
        raise ValueError("variance_threshold must lie in (0, 1)")
    x = train.points if isinstance(train, Dataset) else np.asarray(train, dtype=float)
    std = Standardizer.fit(x)
    z = std.transform(x)
    _, svals, vt = np.linalg.svd(z, full_matrices=False)
    var = svals**2
    total = float(var.sum())
    if total <= 0:
        # all features constant; keep nothing, score is pure centering error
        return PcaTruncModel(np.zeros((0, z.shape[1])), 0.0, std)
    cum = np.cumsum(var) / total
    m = int(np.searchsorted(cum, variance_threshold) + 1)
    return PcaTruncModel(components=vt[:m], explained_fraction=float(cum[m - 1]), standardizer=std)
