"""Down-weighting synthetic OOD samples that clash with ID training data.

The scheme works on three probability-density proxies: f_X for the input
domain, f_ID for the in-distribution, and f_OOD for the synthetic OOD
samples.  All three are rescaled so the input-domain pdf dominates the
other two, then each point's OOD weight is the share of the combined
sampling mass not taken up by ID:

    w_OOD(x) = 1 - f_ID(x) / max(f_ID(x), f_OOD(x))

so OOD samples landing where ID density dominates get weight 0, samples in
ID-free territory get weight 1, and w_ID is the pointwise complement.
Densities are kernel density estimates; a triangular ("linear") kernel
with compact support is the default.
"""

from dataclasses import dataclass, replace
from typing import Callable, Union

import numpy as np

from .data import Dataset
from .synthesis import SynthesisedSet
from .toys import ToySpec, reference_ood_score

__all__ = [
    "PdfProxy",
    "WeightingContext",
    "estimate_pdf",
    "rescale_dominate",
    "ood_weight",
    "id_weight",
    "weight_synthesised_set",
]

# Densities below this floor are treated as zero in every ratio.
DENSITY_FLOOR = 1e-12

_CHUNK = 1024


def _kernel_profile(kernel: str, u: np.ndarray) -> np.ndarray:
    if kernel == "linear":
        return np.maximum(0.0, 1.0 - np.abs(u))
    if kernel == "gaussian":
        return np.exp(-0.5 * u**2) / np.sqrt(2.0 * np.pi)
    raise ValueError(f"unknown kernel {kernel!r}")


@dataclass(frozen=True)
class PdfProxy:
    """Product-kernel density estimate.

    pdf(x) = mean_i prod_j K((x_j - s_ij) / h_j) / h_j, which integrates to
    one for both supported kernels.  The linear kernel has compact support:
    the density is exactly zero once any coordinate is more than one
    bandwidth from every sample.
    """

    samples: np.ndarray
    kernel: str
    bandwidth: np.ndarray
    space: str = "input"  # label: "input" or "reference_error"

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim == 1:
            s = s[:, None]
        if s.ndim != 2 or len(s) == 0:
            raise ValueError("samples must be a non-empty vector or matrix")
        bw = np.broadcast_to(np.asarray(self.bandwidth, dtype=float), (s.shape[1],)).copy()
        if np.any(bw <= 0):
            raise ValueError("bandwidth must be positive")
        _kernel_profile(self.kernel, np.zeros(1))
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "bandwidth", bw)

    def evaluate(self, x) -> np.ndarray:
        pts = np.asarray(x, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.shape[1] != self.samples.shape[1]:
            raise ValueError("query dimension does not match the samples")
        norm = float(np.prod(self.bandwidth))
        out = np.empty(len(pts))
        for start in range(0, len(pts), _CHUNK):
            block = pts[start : start + _CHUNK]
            u = (block[:, None, :] - self.samples[None, :, :]) / self.bandwidth
            out[start : start + _CHUNK] = (
                np.prod(_kernel_profile(self.kernel, u), axis=2).mean(axis=1) / norm
            )
        return out

    __call__ = evaluate


def estimate_pdf(samples, kernel: str = "linear", bandwidth=1.0, space: str = "input") -> PdfProxy:
    return PdfProxy(samples=samples, kernel=kernel, bandwidth=bandwidth, space=space)


PdfLike = Union[PdfProxy, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class WeightingContext:
    """The three density proxies plus their domination scale factors."""

    f_x: PdfLike
    f_id: PdfLike
    f_ood: PdfLike
    s_id: float = 1.0
    s_ood: float = 1.0


def _min_ratio(fx: np.ndarray, f: np.ndarray) -> float:
    mask = f >= DENSITY_FLOOR
    if not np.any(mask):
        return 1.0
    return float(min(1.0, np.min(fx[mask] / f[mask])))


def rescale_dominate(ctx: WeightingContext, eval_points) -> WeightingContext:
    """Scale factors making the input-domain pdf dominate f_ID and f_OOD on
    the evaluation points.  Factors never exceed 1 (no up-scaling); points
    where the candidate pdf is below the density floor are skipped."""
    pts = np.asarray(eval_points, dtype=float)
    fx = np.asarray(ctx.f_x(pts), dtype=float)
    if np.all(fx < DENSITY_FLOOR):
        raise ValueError("input-domain pdf is zero on every evaluation point")
    s_id = _min_ratio(fx, np.asarray(ctx.f_id(pts), dtype=float))
    s_ood = _min_ratio(fx, np.asarray(ctx.f_ood(pts), dtype=float))
    return replace(ctx, s_id=s_id, s_ood=s_ood)


def _scaled_densities(ctx: WeightingContext, points) -> tuple[np.ndarray, np.ndarray]:
    pts = np.asarray(points, dtype=float)
    fid = ctx.s_id * np.asarray(ctx.f_id(pts), dtype=float)
    food = ctx.s_ood * np.asarray(ctx.f_ood(pts), dtype=float)
    return fid, food


def ood_weight(ctx: WeightingContext, points) -> np.ndarray:
    """w_OOD = 1 - f_ID / max(f_ID, f_OOD) on the rescaled proxies; where
    both densities vanish the point is unclaimed territory and weighs 1."""
    fid, food = _scaled_densities(ctx, points)
    denom = np.maximum(fid, food)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = 1.0 - fid / denom
    return np.where(denom < DENSITY_FLOOR, 1.0, w)


def id_weight(ctx: WeightingContext, points) -> np.ndarray:
    """Pointwise complement of :func:`ood_weight`."""
    fid, food = _scaled_densities(ctx, points)
    denom = np.maximum(fid, food)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = fid / denom
    return np.where(denom < DENSITY_FLOOR, 0.0, w)


def _eval_grid(samples: np.ndarray, budget: int = 512) -> np.ndarray:
    """Lattice of roughly ``budget`` points over the samples' bounding box."""
    d = samples.shape[1]
    per_axis = max(2, int(np.ceil(budget ** (1.0 / d))))
    axes = [
        np.linspace(samples[:, j].min(), samples[:, j].max(), per_axis) for j in range(d)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def weight_synthesised_set(
    train: Dataset,
    ood_set: SynthesisedSet,
    spec: ToySpec,
    space: str | None = None,
    kernel: str = "linear",
    bandwidth=None,
) -> SynthesisedSet:
    """Replace the set's weights with w_OOD from density proxies.

    Proxies live in the 1-D reference-detector error space by default:
    distance-to-manifold is where ID and synthetic OOD densities actually
    compete, and the proxy stays cheap in any input dimension.  Input-space
    proxies are available via ``space="input"``.  f_X is assumed equal to
    f_OOD: the synthetic samples are taken as having covered the relevant
    input domain.  A single fixed bandwidth -- the Scott rule on the pooled
    ID+OOD samples unless given -- is shared by both proxies; the fixed
    bandwidth deliberately over-smooths sharp ID boundaries (visible on the
    haystack), which is exposed as a knob rather than hidden.
    """
    if space is None:
        space = "reference_error"
    if space == "input":
        sid = train.points
        sood = ood_set.points
    elif space == "reference_error":
        sid = reference_ood_score(spec, train.points)[:, None]
        sood = reference_ood_score(spec, ood_set.points)[:, None]
    else:
        raise ValueError(f"unknown weighting space {space!r}")

    pooled = np.vstack([sid, sood])
    if bandwidth is None:
        d = pooled.shape[1]
        std = pooled.std(axis=0)
        bandwidth = len(pooled) ** (-1.0 / (d + 4)) * np.where(std > 0, std, 1.0)
    f_id = PdfProxy(sid, kernel, bandwidth, space=space)
    f_ood = PdfProxy(sood, kernel, bandwidth, space=space)
    ctx = WeightingContext(f_x=f_ood, f_id=f_id, f_ood=f_ood)
    eval_pts = np.vstack([sid, sood, _eval_grid(pooled)])
    ctx = rescale_dominate(ctx, eval_pts)
    return replace(ood_set, weights=ood_weight(ctx, sood))
