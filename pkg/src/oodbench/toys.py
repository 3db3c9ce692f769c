"""The three visualisable toy examples and their analytic reference detector.

Each toy defines an in-distribution (ID) manifold in feature space:

* ``line`` -- two clusters of points scattered along a 2-D line; ID means
  within two noise standard deviations of the line.
* ``circle`` -- points scattered around a sine-displaced circular boundary
  (the interior stays empty); ID means within two standard deviations of
  the displaced boundary, measured radially.
* ``haystack`` -- a 10-D correlated Gaussian with one feature pinned to a
  constant; ID means the pinned feature holds its training value exactly.

The reference detector returns the distance to the ID manifold (zero on
it), which both serves as an idealised scoring baseline and supplies
analytic error gradients for adversarial input synthesis.
"""

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.special import ndtr, ndtri

from .data import Dataset, LabeledSplits
from .rng import substream

__all__ = [
    "LineSpec",
    "CircleSpec",
    "HaystackSpec",
    "ToySpec",
    "line_spec",
    "circle_spec",
    "haystack_spec",
    "toy_spec",
    "TOY_NAMES",
    "generate_toy",
    "ground_truth_id",
    "reference_ood_score",
    "reference_error_gradient",
    "plotting_window",
]

# Fixed key for the default haystack covariance so the default spec is a
# constant, independent of any run seed.
_COV_KEY = 1_000_003

TOY_NAMES = ("line", "circle", "haystack")


@dataclass(frozen=True)
class LineSpec:
    """Two training clusters along a 2-D line with perpendicular scatter."""

    anchor: np.ndarray
    direction: np.ndarray  # unit vector
    intervals: tuple[tuple[float, float], tuple[float, float]]  # disjoint param ranges
    noise_sigma: float = 0.1

    kind = "line"
    dim = 2

    def __post_init__(self):
        object.__setattr__(self, "anchor", np.asarray(self.anchor, dtype=float))
        d = np.asarray(self.direction, dtype=float)
        if not math.isclose(float(np.linalg.norm(d)), 1.0, rel_tol=1e-9):
            raise ValueError("direction must be a unit vector")
        object.__setattr__(self, "direction", d)
        if self.noise_sigma <= 0:
            raise ValueError("noise_sigma must be positive")
        (a0, a1), (b0, b1) = self.intervals
        if not (a0 < a1 and b0 < b1):
            raise ValueError("intervals must be non-empty")
        if max(a0, b0) <= min(a1, b1):
            raise ValueError("cluster intervals must be disjoint")

    @property
    def normal(self) -> np.ndarray:
        dx, dy = self.direction
        return np.array([-dy, dx])


@dataclass(frozen=True)
class CircleSpec:
    """Scatter around a circle whose radius is displaced by a sine wave."""

    center: np.ndarray
    base_radius: float = 2.0
    sine_amplitude: float = 0.3
    sine_frequency: int = 6
    noise_sigma: float = 0.1

    kind = "circle"
    dim = 2

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.noise_sigma <= 0:
            raise ValueError("noise_sigma must be positive")
        if not self.sine_amplitude < self.base_radius:
            raise ValueError("sine amplitude must stay below the base radius")
        if int(self.sine_frequency) != self.sine_frequency:
            raise ValueError("sine frequency must be an integer")

    def boundary_radius(self, theta: np.ndarray) -> np.ndarray:
        return self.base_radius + self.sine_amplitude * np.sin(self.sine_frequency * theta)


@dataclass(frozen=True)
class HaystackSpec:
    """High-dimensional Gaussian with one feature pinned to a constant."""

    mean: np.ndarray
    covariance: np.ndarray  # SPD before the constant feature is pinned
    constant_feature_index: int = 4
    constant_value: float = 0.5
    sweep_range: tuple[float, float] = field(default=None)  # OOD range for the pinned feature

    kind = "haystack"

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.covariance, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise ValueError("covariance shape must match mean dimension")
        if not np.allclose(cov, cov.T):
            raise ValueError("covariance must be symmetric")
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise ValueError("covariance must be positive definite") from None
        if not 0 <= self.constant_feature_index < mean.size:
            raise ValueError("constant feature index out of range")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "_chol", chol)
        if self.sweep_range is None:
            c = self.constant_value
            object.__setattr__(self, "sweep_range", (c - 1.5, c + 1.5))

    @property
    def dim(self) -> int:
        return self.mean.size

    @property
    def target_feature_index(self) -> int:
        # First feature that is not pinned; used as the regression target.
        return 0 if self.constant_feature_index != 0 else 1


ToySpec = Union[LineSpec, CircleSpec, HaystackSpec]


def line_spec(noise_sigma: float = 0.1) -> LineSpec:
    return LineSpec(
        anchor=np.zeros(2),
        direction=np.array([2.0, 1.0]) / math.sqrt(5.0),
        intervals=((-3.0, -1.0), (1.0, 3.0)),
        noise_sigma=noise_sigma,
    )


def circle_spec(noise_sigma: float = 0.1) -> CircleSpec:
    return CircleSpec(center=np.zeros(2), noise_sigma=noise_sigma)


def haystack_spec(dim: int = 10) -> HaystackSpec:
    """Default haystack: rotated anisotropic covariance, feature 4 pinned to 0.5."""
    rng = substream(_COV_KEY, "haystack-covariance", dim)
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)))
    q *= np.sign(np.diag(r))  # unique orthogonal factor
    cov = q @ np.diag(np.linspace(0.5, 2.0, dim)) @ q.T
    cov = (cov + cov.T) / 2.0
    return HaystackSpec(mean=np.zeros(dim), covariance=cov)


def toy_spec(name: str, **overrides) -> ToySpec:
    """Build one of the named toys with default parameters."""
    factories = {"line": line_spec, "circle": circle_spec, "haystack": haystack_spec}
    if name not in factories:
        raise ValueError(f"unknown toy {name!r}; expected one of {TOY_NAMES}")
    return factories[name](**overrides)


def plotting_window(spec: ToySpec) -> tuple[tuple[float, float], tuple[float, float]]:
    """Axis ranges used for confidence grids and uniform OOD test sampling.

    For the haystack the window is the 1-D sweep range of the pinned
    feature, returned twice for interface uniformity.
    """
    if spec.kind == "line":
        return ((-5.0, 5.0), (-5.0, 5.0))
    if spec.kind == "circle":
        return ((-3.0, 3.0), (-3.0, 3.0))
    lo, hi = spec.sweep_range
    return ((lo, hi), (lo, hi))


def _check_dim(spec: ToySpec, points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != spec.dim:
        raise ValueError(f"points must have shape (N, {spec.dim}), got {pts.shape}")
    return pts


def _truncnorm_2sigma(rng: np.random.Generator, sigma: float, n: int) -> np.ndarray:
    """Gaussian scatter truncated at +/- 2 sigma, via inverse-CDF sampling.

    Truncation keeps every generated point inside the ground-truth ID band.
    """
    lo, hi = ndtr(-2.0), ndtr(2.0)
    u = rng.uniform(lo, hi, size=n)
    return sigma * ndtri(u)


def _manifold_points(spec: ToySpec, rng: np.random.Generator, n: int) -> Dataset:
    """ID points: manifold position plus truncated scatter, with targets."""
    if spec.kind == "line":
        v = rng.uniform(0.0, 1.0, size=n)
        (a0, a1), (b0, b1) = spec.intervals
        la, lb = a1 - a0, b1 - b0
        frac = la / (la + lb)
        t = np.where(v < frac, a0 + (v / frac) * la, b0 + ((v - frac) / (1 - frac)) * lb)
        offs = _truncnorm_2sigma(rng, spec.noise_sigma, n)
        pts = spec.anchor + np.outer(t, spec.direction) + np.outer(offs, spec.normal)
        return Dataset(pts, t)
    if spec.kind == "circle":
        theta = rng.uniform(-math.pi, math.pi, size=n)
        r = spec.boundary_radius(theta) + _truncnorm_2sigma(rng, spec.noise_sigma, n)
        pts = spec.center + np.column_stack([r * np.cos(theta), r * np.sin(theta)])
        return Dataset(pts, theta)
    z = rng.standard_normal(size=(n, spec.dim))
    pts = spec.mean + z @ spec._chol.T
    pts[:, spec.constant_feature_index] = spec.constant_value
    return Dataset(pts, pts[:, spec.target_feature_index].copy())


def _ood_test_points(spec: ToySpec, rng: np.random.Generator, n: int) -> np.ndarray:
    """OOD test points: uniform window draws rejected if ground-truth ID
    (line/circle), or base draws with the pinned feature redrawn uniformly
    over the sweep range (haystack)."""
    if spec.kind == "haystack":
        z = rng.standard_normal(size=(n, spec.dim))
        pts = spec.mean + z @ spec._chol.T
        lo, hi = spec.sweep_range
        pts[:, spec.constant_feature_index] = rng.uniform(lo, hi, size=n)
        return pts
    (x0, x1), (y0, y1) = plotting_window(spec)
    out = np.empty((0, 2))
    while len(out) < n:
        cand = np.column_stack(
            [rng.uniform(x0, x1, size=2 * n), rng.uniform(y0, y1, size=2 * n)]
        )
        out = np.vstack([out, cand[~ground_truth_id(spec, cand)]])
    return out[:n]


def generate_toy(
    spec: ToySpec, seed: int, n_train: int, n_valid: int, n_test: int
) -> LabeledSplits:
    """Generate train/validation/test splits for a toy example.

    Train and validation are in-distribution by construction.  Test is an
    even ID/OOD mixture in shuffled order, with ``test_is_id`` recording
    the generation branch.  Output is deterministic for fixed arguments.
    """
    for name, n in (("n_train", n_train), ("n_valid", n_valid), ("n_test", n_test)):
        if n < 1:
            raise ValueError(f"{name} must be >= 1")
    train = _manifold_points(spec, substream(seed, spec.kind, "train"), n_train)
    valid = _manifold_points(spec, substream(seed, spec.kind, "valid"), n_valid)

    n_id = n_test // 2
    id_part = _manifold_points(spec, substream(seed, spec.kind, "test-id"), n_id)
    ood_pts = _ood_test_points(spec, substream(seed, spec.kind, "test-ood"), n_test - n_id)
    pts = np.vstack([id_part.points, ood_pts])
    flags = np.concatenate([np.ones(n_id, bool), np.zeros(n_test - n_id, bool)])
    order = substream(seed, spec.kind, "test-shuffle").permutation(n_test)
    test = Dataset(pts[order])
    return LabeledSplits(train=train, valid=valid, test=test, test_is_id=flags[order])


def ground_truth_id(spec: ToySpec, points: np.ndarray) -> np.ndarray:
    """True ID flags: manifold distance <= 2 sigma (boundary inclusive) for
    line/circle, exact equality of the pinned feature for the haystack."""
    pts = _check_dim(spec, points)
    if spec.kind == "haystack":
        return pts[:, spec.constant_feature_index] == spec.constant_value
    return reference_ood_score(spec, pts) <= 2.0 * spec.noise_sigma


def reference_ood_score(spec: ToySpec, points: np.ndarray) -> np.ndarray:
    """Idealised OOD score: nonnegative distance to the ID manifold.

    line: perpendicular distance to the line.
    circle: |radius - displaced boundary radius at the point's angle|.
    haystack: |pinned feature - training constant|.
    """
    pts = _check_dim(spec, points)
    if spec.kind == "line":
        return np.abs((pts - spec.anchor) @ spec.normal)
    if spec.kind == "circle":
        d = pts - spec.center
        r = np.hypot(d[:, 0], d[:, 1])
        theta = np.arctan2(d[:, 1], d[:, 0])
        return np.abs(r - spec.boundary_radius(theta))
    return np.abs(pts[:, spec.constant_feature_index] - spec.constant_value)


def reference_error_gradient(spec: ToySpec, points: np.ndarray) -> np.ndarray:
    """Analytic gradient of the squared reference score w.r.t. the input.

    Finite everywhere: defined as zero on the manifold and at the circle
    center, where the squared distance is at a minimum or the angle is
    undefined.
    """
    pts = _check_dim(spec, points)
    if spec.kind == "line":
        s = (pts - spec.anchor) @ spec.normal
        return 2.0 * np.outer(s, spec.normal)
    if spec.kind == "circle":
        d = pts - spec.center
        r = np.hypot(d[:, 0], d[:, 1])
        safe_r = np.where(r > 1e-12, r, 1.0)
        theta = np.arctan2(d[:, 1], d[:, 0])
        resid = r - spec.boundary_radius(theta)
        # d/dx of (r - g(theta)): radial unit vector minus the chain-rule
        # term A*f*cos(f*theta) * grad(theta), grad(theta) = (-dy, dx)/r^2.
        ring = spec.sine_amplitude * spec.sine_frequency * np.cos(spec.sine_frequency * theta)
        gx = d[:, 0] / safe_r + ring * d[:, 1] / safe_r**2
        gy = d[:, 1] / safe_r - ring * d[:, 0] / safe_r**2
        grad = 2.0 * resid[:, None] * np.column_stack([gx, gy])
        grad[r <= 1e-12] = 0.0
        return grad
    grad = np.zeros_like(pts)
    c = spec.constant_feature_index
    grad[:, c] = 2.0 * (pts[:, c] - spec.constant_value)
    return grad
