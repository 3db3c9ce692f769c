"""Gaussian-process detectors.

Exact GP regression with an RBF kernel on standardized inputs.  The plain
detector regresses the toy's target variable and scores queries by the
predictive standard deviation of the latent function; uncertainty grows
away from the training inputs.  Because the method is O(m^3) in the number
of fitted points, training data is subsampled.

Variants:

* noise-contrastive fit: the (subsampled) training set is augmented with
  an equal number of pseudo-points -- inputs jittered by Gaussian noise,
  targets set to the training-target mean -- carrying a large observation
  noise, so they act as weak, high-uncertainty evidence.
* auto-associative fit: one GP regressor per input coordinate, all mapping
  the full input to that coordinate; the score is the squared reconstruction
  error of the predictive means, so no Cholesky factor is kept.

Kernel hyperparameters follow standard heuristics computed on the final
fitted arrays: length scale = median pairwise distance times a factor,
signal variance = target variance.  The uncertainty-scoring fits default
to a factor of 3 with observation noise 1e-4: the stretched kernel keeps
the in-distribution variance floor flat and low, so the variance bump of
a thin off-manifold displacement (the haystack's pinned feature) stays
resolvable.  The auto-associative fit keeps the plain median heuristic
with noise 1e-2.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular
from scipy.spatial.distance import cdist, pdist

from ..data import Dataset, Standardizer
from ..rng import substream
from .base import register_model, standardizer_arrays, standardizer_from_arrays

__all__ = ["GpModel", "AaGpModel", "fit_gp", "fit_ncgp", "fit_aa_gp", "gp_from_arrays"]

DEFAULT_NOISE_VAR = 1e-4
DEFAULT_LENGTHSCALE_FACTOR = 3.0
AA_NOISE_VAR = 1e-2


def _median_lengthscale(z: np.ndarray) -> float:
    if len(z) < 2:
        return 1.0
    med = float(np.median(pdist(z)))
    return med if med > 1e-12 else 1.0


def _rbf(a: np.ndarray, b: np.ndarray, signal_var: float, lengthscale: float) -> np.ndarray:
    return signal_var * np.exp(-cdist(a, b, metric="sqeuclidean") / (2.0 * lengthscale**2))


def _chol_with_jitter(k: np.ndarray):
    """Cholesky of a kernel-plus-noise matrix, retrying with 10x jitter."""
    jitter = 1e-10 * max(float(np.mean(np.diag(k))), 1.0)
    try:
        return cho_factor(k, lower=True), 0.0
    except np.linalg.LinAlgError:
        pass
    for _ in range(3):
        try:
            return cho_factor(k + jitter * np.eye(len(k)), lower=True), jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise np.linalg.LinAlgError("kernel matrix not positive definite even with jitter")


def _subsample(n: int, fraction: float, rng: np.random.Generator) -> np.ndarray:
    if not 0 < fraction <= 1:
        raise ValueError("subsample fraction must lie in (0, 1]")
    m = int(round(fraction * n))
    if m < 2:
        raise ValueError(f"subsample of {n} points at fraction {fraction} yields fewer than 2")
    return np.sort(rng.choice(n, size=m, replace=False))


@register_model
@dataclass(frozen=True)
class GpModel:
    inputs: np.ndarray  # fitted points in standardized space
    alpha: np.ndarray  # (K + noise)^(-1) (y - mean(y))
    chol_lower: np.ndarray
    target_mean: float
    signal_var: float
    lengthscale: float
    noise_diag: np.ndarray
    standardizer: Standardizer
    subsample_fraction: float

    kind = "gp"

    def _query_kernel(self, points) -> tuple[np.ndarray, np.ndarray]:
        z = self.standardizer.transform(np.asarray(points, dtype=float))
        return z, _rbf(z, self.inputs, self.signal_var, self.lengthscale)

    def predict_mean(self, points) -> np.ndarray:
        _, kq = self._query_kernel(points)
        return self.target_mean + kq @ self.alpha

    def predict_var(self, points) -> np.ndarray:
        """Latent predictive variance (excludes observation noise)."""
        _, kq = self._query_kernel(points)
        v = solve_triangular(self.chol_lower, kq.T, lower=True)
        return np.maximum(self.signal_var - np.sum(v**2, axis=0), 0.0)

    def score(self, points) -> np.ndarray:
        return np.sqrt(self.predict_var(points))

    def _arrays(self):
        return {
            "inputs": self.inputs,
            "alpha": self.alpha,
            "chol_lower": self.chol_lower,
            "noise_diag": self.noise_diag,
            **standardizer_arrays(self.standardizer),
        }

    def _scalars(self):
        return {
            "target_mean": self.target_mean,
            "signal_var": self.signal_var,
            "lengthscale": self.lengthscale,
            "subsample_fraction": self.subsample_fraction,
        }

    @classmethod
    def _rebuild(cls, arrays, scalars):
        return cls(
            inputs=arrays["inputs"],
            alpha=arrays["alpha"],
            chol_lower=arrays["chol_lower"],
            target_mean=float(scalars["target_mean"]),
            signal_var=float(scalars["signal_var"]),
            lengthscale=float(scalars["lengthscale"]),
            noise_diag=arrays["noise_diag"],
            standardizer=standardizer_from_arrays(arrays),
            subsample_fraction=float(scalars["subsample_fraction"]),
        )


def gp_from_arrays(
    inputs: np.ndarray,
    targets: np.ndarray,
    noise_diag: np.ndarray,
    standardizer: Standardizer,
    subsample_fraction: float = 1.0,
    lengthscale_factor: float = 1.0,
) -> GpModel:
    """Fit the GP core on explicit (already standardized) arrays.

    Hyperparameters are derived from these exact arrays, so two calls with
    identical arrays produce identical models.
    """
    z = np.asarray(inputs, dtype=float)
    y = np.asarray(targets, dtype=float)
    noise = np.asarray(noise_diag, dtype=float)
    if len(z) != len(y) or len(z) != len(noise):
        raise ValueError("inputs, targets and noise_diag must have equal length")
    if not lengthscale_factor > 0:
        raise ValueError("lengthscale_factor must be positive")
    lengthscale = lengthscale_factor * _median_lengthscale(z)
    signal_var = max(float(y.var()), 1e-12)
    k = _rbf(z, z, signal_var, lengthscale) + np.diag(noise)
    (chol, _), jitter = _chol_with_jitter(k)
    y_mean = float(y.mean())
    alpha = cho_solve((chol, True), y - y_mean)
    return GpModel(
        inputs=z,
        alpha=alpha,
        chol_lower=np.tril(chol),
        target_mean=y_mean,
        signal_var=signal_var,
        lengthscale=lengthscale,
        noise_diag=noise + jitter,
        standardizer=standardizer,
        subsample_fraction=subsample_fraction,
    )


def _standardized_subsample(train: Dataset, fraction: float, rng) -> tuple:
    if train.targets is None:
        raise ValueError("GP regression needs a dataset with targets")
    std = Standardizer.fit(train.points)
    idx = _subsample(len(train), fraction, rng)
    return std, std.transform(train.points)[idx], train.targets[idx]


def fit_gp(
    train: Dataset,
    subsample_fraction: float = 0.1,
    seed: int = 0,
    noise_var: float = DEFAULT_NOISE_VAR,
    lengthscale_factor: float = DEFAULT_LENGTHSCALE_FACTOR,
) -> GpModel:
    rng = substream(seed, "gp-subsample")
    std, zs, ys = _standardized_subsample(train, subsample_fraction, rng)
    return gp_from_arrays(
        zs, ys, np.full(len(zs), noise_var), std, subsample_fraction, lengthscale_factor
    )


def fit_ncgp(
    train: Dataset,
    subsample_fraction: float = 0.1,
    noise_scale: float = 2.0,
    seed: int = 0,
    noise_var: float = DEFAULT_NOISE_VAR,
    pseudo_noise_var: float = 1.0,
    lengthscale_factor: float = DEFAULT_LENGTHSCALE_FACTOR,
) -> GpModel:
    """Noise-contrastive GP: equal count of jittered pseudo-points, targets
    at the training-target mean, observation noise ``pseudo_noise_var``."""
    if noise_scale < 0:
        raise ValueError("noise_scale must be non-negative")
    rng = substream(seed, "gp-subsample")
    std, zs, ys = _standardized_subsample(train, subsample_fraction, rng)
    jit = substream(seed, "ncgp-pseudo").normal(scale=noise_scale, size=zs.shape)
    z_all = np.vstack([zs, zs + jit])
    y_all = np.concatenate([ys, np.full(len(ys), ys.mean())])
    noise = np.concatenate([np.full(len(ys), noise_var), np.full(len(ys), pseudo_noise_var)])
    return gp_from_arrays(z_all, y_all, noise, std, subsample_fraction, lengthscale_factor)


@register_model
@dataclass(frozen=True)
class AaGpModel:
    """Per-coordinate GP regressors of the input onto itself; the score is
    the summed squared error of the predictive means, so only the mean
    weights are kept and the model stays small."""

    inputs: np.ndarray
    alphas: np.ndarray  # (D, m) mean weights per output coordinate
    target_means: np.ndarray  # (D,)
    signal_vars: np.ndarray  # (D,)
    lengthscale: float
    noise_var: float
    standardizer: Standardizer
    subsample_fraction: float

    kind = "aa_gp"

    def reconstruct(self, points) -> np.ndarray:
        """Predictive means per coordinate, in standardized space."""
        z = self.standardizer.transform(np.asarray(points, dtype=float))
        k_unit = np.exp(-cdist(z, self.inputs, "sqeuclidean") / (2.0 * self.lengthscale**2))
        return self.target_means + (k_unit @ self.alphas.T) * self.signal_vars

    def score(self, points) -> np.ndarray:
        z = self.standardizer.transform(np.asarray(points, dtype=float))
        return np.sum((self.reconstruct(points) - z) ** 2, axis=1)

    def _arrays(self):
        return {
            "inputs": self.inputs,
            "alphas": self.alphas,
            "target_means": self.target_means,
            "signal_vars": self.signal_vars,
            **standardizer_arrays(self.standardizer),
        }

    def _scalars(self):
        return {
            "lengthscale": self.lengthscale,
            "noise_var": self.noise_var,
            "subsample_fraction": self.subsample_fraction,
        }

    @classmethod
    def _rebuild(cls, arrays, scalars):
        return cls(
            inputs=arrays["inputs"],
            alphas=arrays["alphas"],
            target_means=arrays["target_means"],
            signal_vars=arrays["signal_vars"],
            lengthscale=float(scalars["lengthscale"]),
            noise_var=float(scalars["noise_var"]),
            standardizer=standardizer_from_arrays(arrays),
            subsample_fraction=float(scalars["subsample_fraction"]),
        )


def fit_aa_gp(
    train: Dataset,
    subsample_fraction: float = 0.01,
    seed: int = 0,
    noise_var: float = AA_NOISE_VAR,
    lengthscale_factor: float = 1.0,
) -> AaGpModel:
    x = train.points if isinstance(train, Dataset) else np.asarray(train, dtype=float)
    std = Standardizer.fit(x)
    z = std.transform(x)
    idx = _subsample(len(z), subsample_fraction, substream(seed, "aa-gp-subsample"))
    zs = z[idx]
    m, d = zs.shape

    if not lengthscale_factor > 0:
        raise ValueError("lengthscale_factor must be positive")
    lengthscale = lengthscale_factor * _median_lengthscale(zs)
    k_unit = np.exp(-cdist(zs, zs, "sqeuclidean") / (2.0 * lengthscale**2))
    alphas = np.empty((d, m))
    target_means = zs.mean(axis=0)
    signal_vars = zs.var(axis=0)
    for dim in range(d):
        sv = float(signal_vars[dim])
        k = sv * k_unit + noise_var * np.eye(m)
        (chol, _), _ = _chol_with_jitter(k)
        alphas[dim] = cho_solve((chol, True), zs[:, dim] - target_means[dim])
    return AaGpModel(
        inputs=zs,
        alphas=alphas,
        target_means=target_means,
        signal_vars=signal_vars,
        lengthscale=lengthscale,
        noise_var=noise_var,
        standardizer=std,
        subsample_fraction=subsample_fraction,
    )
