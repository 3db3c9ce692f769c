"""Core data containers shared by the toy generators and detectors."""

import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = ["Dataset", "LabeledSplits", "Standardizer", "dataset_to_csv", "dataset_from_csv"]

# Floating-point CSV format: shortest round-trippable representation.
_FLOAT_FMT = "{:.17g}"


def _as_matrix(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise ValueError(f"points must be a 2-D matrix, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points contain non-finite values")
    return pts


@dataclass(frozen=True)
class Dataset:
    """A matrix of input points with an optional per-point target value."""

    points: np.ndarray
    targets: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "points", _as_matrix(self.points))
        if self.targets is not None:
            t = np.asarray(self.targets, dtype=float)
            if t.shape != (len(self.points),):
                raise ValueError("targets length must match number of points")
            object.__setattr__(self, "targets", t)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class LabeledSplits:
    """Train/validation/test datasets; ground-truth ID flags exist for test only.

    Train and validation contain in-distribution points exclusively.
    """

    train: Dataset
    valid: Dataset
    test: Dataset
    test_is_id: np.ndarray = field(repr=False)

    def __post_init__(self):
        flags = np.asarray(self.test_is_id, dtype=bool)
        if flags.shape != (len(self.test),):
            raise ValueError("test_is_id length must match test set size")
        object.__setattr__(self, "test_is_id", flags)


@dataclass(frozen=True)
class Standardizer:
    """Per-feature centering and scaling learned from training points.

    Features with (near-)zero variance keep scale 1 so they pass through
    centering only; a constant training feature must not blow up when a
    query deviates from the constant.
    """

    mean: np.ndarray
    scale: np.ndarray

    STD_FLOOR = 1e-12

    @classmethod
    def fit(cls, points: np.ndarray) -> "Standardizer":
        pts = _as_matrix(points)
        mean = pts.mean(axis=0)
        std = pts.std(axis=0)
        scale = np.where(std > cls.STD_FLOOR, std, 1.0)
        return cls(mean=mean, scale=scale)

    def transform(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points, dtype=float) - self.mean) / self.scale


def _fmt(x: float) -> str:
    return _FLOAT_FMT.format(float(x))


def dataset_to_csv(ds: Dataset, is_id: Optional[np.ndarray] = None) -> str:
    """Serialize a dataset as CSV with header ``x0,...,xD-1,target,is_id``.

    A missing target column is written as empty fields; ``is_id`` defaults
    to 1 (datasets without flags hold in-distribution points).
    """
    d = ds.dim
    header = ",".join([f"x{i}" for i in range(d)] + ["target", "is_id"])
    flags = np.ones(len(ds), dtype=int) if is_id is None else np.asarray(is_id).astype(int)
    out = io.StringIO()
    out.write(header + "\n")
    for i, row in enumerate(ds.points):
        cells = [_fmt(v) for v in row]
        cells.append("" if ds.targets is None else _fmt(ds.targets[i]))
        cells.append(str(flags[i]))
        out.write(",".join(cells) + "\n")
    return out.getvalue()


def dataset_from_csv(text: str) -> tuple[Dataset, np.ndarray]:
    """Inverse of :func:`dataset_to_csv`; returns (dataset, is_id flags)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = lines[0].split(",")
    if header[-2:] != ["target", "is_id"]:
        raise ValueError("unrecognized dataset CSV header")
    d = len(header) - 2
    points, targets, flags = [], [], []
    has_target = True
    for ln in lines[1:]:
        cells = ln.split(",")
        points.append([float(c) for c in cells[:d]])
        if cells[d] == "":
            has_target = False
        else:
            targets.append(float(cells[d]))
        flags.append(bool(int(cells[d + 1])))
    ds = Dataset(np.array(points), np.array(targets) if has_target else None)
    return ds, np.array(flags, dtype=bool)
