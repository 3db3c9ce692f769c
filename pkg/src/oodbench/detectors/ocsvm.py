"""One-class support vector machine with an RBF kernel.

The nu-parameterised dual

    min_a  0.5 a' K a   s.t.  0 <= a_i <= 1/(nu n),  sum_i a_i = 1

is solved by sequential minimal optimisation with maximal-violating-pair
working-set selection.  nu upper-bounds the training outlier fraction and
lower-bounds the support-vector fraction.  Scores are the negated decision
function, so positive score means outside the learned region.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from ..data import Dataset, Standardizer
from .base import register_model, standardizer_arrays, standardizer_from_arrays

__all__ = ["OcSvmModel", "fit_ocsvm", "rbf_kernel"]


def rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    return np.exp(-gamma * cdist(a, b, metric="sqeuclidean"))


def _smo_one_class(q: np.ndarray, nu: float, tol: float, max_iter: int):
    """SMO loop on the one-class dual; returns (alpha, rho, converged).

    KKT state at optimum: grad_i >= rho where a_i = 0, grad_i <= rho where
    a_i = C, grad_i = rho on free points.  Each step moves mass between the
    lowest-gradient raisable index and the highest-gradient lowerable one.
    """
    n = q.shape[0]
    c = 1.0 / (nu * n)
    alpha = np.zeros(n)
    m = int(np.floor(nu * n))
    alpha[:m] = c
    if m < n:
        alpha[m] = (nu * n - m) * c
    grad = q @ alpha

    bound_eps = 1e-14
    converged = False
    for _ in range(max_iter):
        up = alpha < c - bound_eps
        low = alpha > bound_eps
        i = int(np.flatnonzero(up)[np.argmin(grad[up])])
        j = int(np.flatnonzero(low)[np.argmax(grad[low])])
        if grad[j] - grad[i] < tol:
            converged = True
            break
        curv = q[i, i] + q[j, j] - 2.0 * q[i, j]
        step = (grad[j] - grad[i]) / max(curv, 1e-12)
        step = min(step, c - alpha[i], alpha[j])
        alpha[i] += step
        alpha[j] -= step
        grad += step * (q[:, i] - q[:, j])

    free = (alpha > 1e-8 * c) & (alpha < c * (1 - 1e-8))
    if np.any(free):
        rho = float(grad[free].mean())
    else:
        upper = grad[alpha >= c - bound_eps]
        lower = grad[alpha <= bound_eps]
        hi = float(upper.max()) if upper.size else float(grad.min())
        lo = float(lower.min()) if lower.size else float(grad.max())
        rho = 0.5 * (hi + lo)
    return alpha, rho, converged


@register_model
@dataclass(frozen=True)
class OcSvmModel:
    support_vectors: np.ndarray  # standardized space
    dual_coef: np.ndarray
    rho: float
    gamma: float
    nu: float
    standardizer: Standardizer
    converged: bool

    kind = "ocsvm"

    def decision_function(self, points) -> np.ndarray:
        z = self.standardizer.transform(np.asarray(points, dtype=float))
        return rbf_kernel(z, self.support_vectors, self.gamma) @ self.dual_coef - self.rho

    def score(self, points) -> np.ndarray:
        return -self.decision_function(points)

    def _arrays(self):
        return {
            "support_vectors": self.support_vectors,
            "dual_coef": self.dual_coef,
            **standardizer_arrays(self.standardizer),
        }

    def _scalars(self):
        return {
            "rho": self.rho,
            "gamma": self.gamma,
            "nu": self.nu,
            "converged": bool(self.converged),
        }

    @classmethod
    def _rebuild(cls, arrays, scalars):
        return cls(
            support_vectors=arrays["support_vectors"],
            dual_coef=arrays["dual_coef"],
            rho=float(scalars["rho"]),
            gamma=float(scalars["gamma"]),
            nu=float(scalars["nu"]),
            standardizer=standardizer_from_arrays(arrays),
            converged=bool(scalars["converged"]),
        )


def fit_ocsvm(
    train: Dataset,
    nu: float = 0.5,
    gamma: float | None = None,
    tol: float = 1e-4,
    max_iter: int | None = None,
) -> OcSvmModel:
    """Fit on standardized inputs.  gamma defaults to 1 / (D * total variance)
    of the standardized training matrix."""
    if not 0 < nu <= 1:
        raise ValueError("nu must lie in (0, 1]")
    x = train.points if isinstance(train, Dataset) else np.asarray(train, dtype=float)
    std = Standardizer.fit(x)
    z = std.transform(x)
    n, d = z.shape
    if gamma is None:
        total_var = float(z.var())
        gamma = 1.0 / (d * total_var) if total_var > 0 else 1.0
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if max_iter is None:
        max_iter = 100_000 + 100 * n

    q = rbf_kernel(z, z, gamma)
    alpha, rho, converged = _smo_one_class(q, nu, tol, max_iter)
    if not converged:
        warnings.warn("one-class SVM dual did not reach KKT tolerance; using best iterate")

    sv = alpha > 1e-12
    return OcSvmModel(
        support_vectors=z[sv],
        dual_coef=alpha[sv],
        rho=rho,
        gamma=float(gamma),
        nu=float(nu),
        standardizer=std,
        converged=converged,
    )
