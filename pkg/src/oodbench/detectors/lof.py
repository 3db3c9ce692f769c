"""Local outlier factor in novelty mode: the query's local density is
compared against the densities of its k nearest training points.  Scores
sit near 1 inside uniformly dense regions and grow well above 1 for
outliers.  The query itself is never counted among its own neighbours."""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from ..data import Dataset
from .base import register_model

__all__ = ["LofModel", "fit_lof"]

# Reachability-distance floor; keeps densities finite when training points
# coincide exactly.
_REACH_FLOOR = 1e-12


def _k_nearest(dists: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.argpartition(dists, k - 1, axis=1)[:, :k]
    nd = np.take_along_axis(dists, idx, axis=1)
    order = np.argsort(nd, axis=1, kind="stable")
    return np.take_along_axis(idx, order, axis=1), np.take_along_axis(nd, order, axis=1)


@register_model
@dataclass(frozen=True)
class LofModel:
    points: np.ndarray
    k: int
    k_distance: np.ndarray  # distance to each training point's k-th neighbour
    lrd: np.ndarray  # local reachability density per training point

    kind = "lof"

    def score(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.points.shape[1]:
            raise ValueError(f"points must have shape (N, {self.points.shape[1]})")
        d = cdist(pts, self.points)
        nb_idx, nb_dist = _k_nearest(d, self.k)
        reach = np.maximum(np.maximum(self.k_distance[nb_idx], nb_dist), _REACH_FLOOR)
        lrd_query = 1.0 / reach.mean(axis=1)
        return self.lrd[nb_idx].mean(axis=1) / lrd_query

    def _arrays(self):
        return {"points": self.points, "k_distance": self.k_distance, "lrd": self.lrd}

    def _scalars(self):
        return {"k": self.k}

    @classmethod
    def _rebuild(cls, arrays, scalars):
        return cls(arrays["points"], int(scalars["k"]), arrays["k_distance"], arrays["lrd"])


def fit_lof(train: Dataset, k: int = 20) -> LofModel:
    x = train.points if isinstance(train, Dataset) else np.asarray(train, dtype=float)
    n = len(x)
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n_train, got k={k}, n={n}")
    d = cdist(x, x)
    np.fill_diagonal(d, np.inf)  # a training point is not its own neighbour
    nb_idx, nb_dist = _k_nearest(d, k)
    k_distance = nb_dist[:, -1]
    reach = np.maximum(np.maximum(k_distance[nb_idx], nb_dist), _REACH_FLOOR)
    lrd = 1.0 / reach.mean(axis=1)
    return LofModel(points=x.copy(), k=k, k_distance=k_distance, lrd=lrd)
