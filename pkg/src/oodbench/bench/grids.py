"""Confidence grids: lattice fields for the 2-D toys and quantile sweeps
for the haystack, plus their CSV schemas."""

import io
from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = ["GridField", "grid_to_csv", "grid_from_csv", "SWEEP_QUANTILES"]

SWEEP_QUANTILES = (0.05, 0.25, 0.50, 0.75, 0.95)

_FLOAT = "{:.17g}".format


@dataclass(frozen=True)
class GridField:
    """Either an R x R lattice of confidences over the plotting window
    (``kind="lattice"``: xs, ys, confidence[iy, ix]) or a sweep of
    confidence quantiles against the pinned-feature value
    (``kind="sweep"``: values, quantiles[i, q], marker_value)."""

    toy: str
    method: str
    kind: str
    xs: Optional[np.ndarray] = None
    ys: Optional[np.ndarray] = None
    confidence: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None
    quantiles: Optional[np.ndarray] = None
    marker_value: Optional[float] = None

    def __post_init__(self):
        if self.kind == "lattice":
            if self.confidence is None or self.xs is None or self.ys is None:
                raise ValueError("lattice grid needs xs, ys and confidence")
            c = np.asarray(self.confidence, dtype=float)
            if c.shape != (len(self.ys), len(self.xs)):
                raise ValueError("confidence must be shaped (len(ys), len(xs))")
            if np.any(c < 0) or np.any(c > 1):
                raise ValueError("confidences must lie in [0, 1]")
            object.__setattr__(self, "confidence", c)
        elif self.kind == "sweep":
            if self.values is None or self.quantiles is None:
                raise ValueError("sweep grid needs values and quantiles")
            q = np.asarray(self.quantiles, dtype=float)
            if q.shape != (len(self.values), len(SWEEP_QUANTILES)):
                raise ValueError("quantiles must be shaped (len(values), 5)")
            if np.any(q < 0) or np.any(q > 1):
                raise ValueError("confidences must lie in [0, 1]")
            object.__setattr__(self, "quantiles", q)
        else:
            raise ValueError(f"unknown grid kind {self.kind!r}")


def grid_to_csv(grid: GridField) -> str:
    """Lattice grids: ``x,y,confidence`` rows in row-major order (y outer,
    x inner).  Sweep grids: ``constant_value,q05,q25,q50,q75,q95``."""
    out = io.StringIO()
    if grid.kind == "lattice":
        out.write("x,y,confidence\n")
        for iy, y in enumerate(grid.ys):
            for ix, x in enumerate(grid.xs):
                out.write(f"{_FLOAT(x)},{_FLOAT(y)},{_FLOAT(grid.confidence[iy, ix])}\n")
    else:
        out.write("constant_value,q05,q25,q50,q75,q95\n")
        for v, qs in zip(grid.values, grid.quantiles):
            out.write(",".join([_FLOAT(v)] + [_FLOAT(q) for q in qs]) + "\n")
    return out.getvalue()


def grid_from_csv(text: str, toy: str = "", method: str = "", marker_value=None) -> GridField:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = lines[0].strip()
    rows = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]])
    if header == "x,y,confidence":
        xs = np.unique(rows[:, 0])
        ys = np.unique(rows[:, 1])
        if len(rows) != len(xs) * len(ys):
            raise ValueError("lattice CSV does not cover a full grid")
        conf = rows[:, 2].reshape(len(ys), len(xs))
        return GridField(toy=toy, method=method, kind="lattice", xs=xs, ys=ys, confidence=conf)
    if header == "constant_value,q05,q25,q50,q75,q95":
        return GridField(
            toy=toy,
            method=method,
            kind="sweep",
            values=rows[:, 0],
            quantiles=rows[:, 1:6],
            marker_value=marker_value,
        )
    raise ValueError("unrecognized grid CSV header")
