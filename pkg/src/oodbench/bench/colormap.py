"""256-entry colormap lookup tables for the confidence heatmaps.

"linear" is a documented approximation of a perceptually-linear ramp from
dark blue through green and orange to bright yellow: lightness increases
monotonically with the confidence value, built by piecewise-linear
interpolation between fixed anchors.  The figures are qualitative, so an
approximation is sufficient.
"""

import numpy as np

__all__ = ["colormap_lut", "COLORMAPS"]

_LINEAR_ANCHORS = (
    (0.00, (10, 12, 95)),
    (0.20, (35, 70, 160)),
    (0.40, (30, 125, 155)),
    (0.60, (70, 165, 95)),
    (0.80, (185, 175, 50)),
    (1.00, (255, 240, 90)),
)


def _interpolate(anchors) -> np.ndarray:
    pos = np.array([a[0] for a in anchors])
    rgb = np.array([a[1] for a in anchors], dtype=float)
    x = np.linspace(0.0, 1.0, 256)
    lut = np.column_stack([np.interp(x, pos, rgb[:, c]) for c in range(3)])
    return np.clip(np.round(lut), 0, 255).astype(np.uint8)


COLORMAPS = {
    "linear": _interpolate(_LINEAR_ANCHORS),
    "gray": np.repeat(np.arange(256, dtype=np.uint8)[:, None], 3, axis=1),
}


def colormap_lut(name: str) -> np.ndarray:
    """The (256, 3) uint8 lookup table for a named colormap."""
    if name not in COLORMAPS:
        raise ValueError(f"unknown colormap {name!r}; available: {sorted(COLORMAPS)}")
    return COLORMAPS[name]
