"""Rasterise confidence grids to PNG bytes.

Lattice grids map one cell to one pixel through the 256-entry colormap
lookup table, with a fixed white margin around the field.  Training points
overlay as black markers and synthetic OOD points as white markers.  Sweep
grids render as quantile-band charts (outer band q05-q95, inner q25-q75,
bright median line) with a white vertical line at the marker value.

The encoder is self-contained (zlib + PNG chunks), so the output can be
verified with any independent PNG decoder.
"""

import struct
import zlib

import numpy as np

from .colormap import colormap_lut
from .grids import GridField

__all__ = ["render_png", "encode_png", "MARGIN_PX"]

MARGIN_PX = 8
_SWEEP_HEIGHT = 256
_SWEEP_COL_PX = 3


def encode_png(rgb: np.ndarray) -> bytes:
    """Encode an (H, W, 3) uint8 array as an 8-bit RGB PNG."""
    img = np.asarray(rgb)
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise ValueError("expected an (H, W, 3) uint8 array")
    h, w = img.shape[:2]

    def chunk(tag: bytes, payload: bytes) -> bytes:
        return (
            struct.pack(">I", len(payload))
            + tag
            + payload
            + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF)
        )

    ihdr = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)  # 8-bit RGB
    raw = b"".join(b"\x00" + img[row].tobytes() for row in range(h))  # filter 0 per row
    return (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", ihdr)
        + chunk(b"IDAT", zlib.compress(raw, 9))
        + chunk(b"IEND", b"")
    )


def _to_pixel(value: float, lo: float, hi: float, n: int) -> int:
    """Nearest pixel index for a data coordinate on an n-cell axis."""
    if hi <= lo:
        return 0
    frac = (value - lo) / (hi - lo)
    return int(np.clip(round(frac * (n - 1)), 0, n - 1))


def _stamp(img: np.ndarray, row: int, col: int, color) -> None:
    img[max(row, 0) : row + 1, max(col, 0) : col + 1] = color


def _render_lattice(grid: GridField, lut, training_overlay, synthetic_overlay) -> np.ndarray:
    conf = grid.confidence
    idx = np.clip(np.round(conf * 255).astype(int), 0, 255)
    field = lut[idx]  # (ny, nx, 3); row iy=0 is the smallest y
    field = field[::-1]  # image rows run top-down

    ny, nx = conf.shape
    m = MARGIN_PX
    img = np.full((ny + 2 * m, nx + 2 * m, 3), 255, dtype=np.uint8)
    img[m : m + ny, m : m + nx] = field

    x_lo, x_hi = float(grid.xs[0]), float(grid.xs[-1])
    y_lo, y_hi = float(grid.ys[0]), float(grid.ys[-1])

    def draw(points, color):
        for x, y in np.asarray(points, dtype=float)[:, :2]:
            if not (x_lo <= x <= x_hi and y_lo <= y <= y_hi):
                continue
            col = m + _to_pixel(x, x_lo, x_hi, nx)
            row = m + (ny - 1 - _to_pixel(y, y_lo, y_hi, ny))
            _stamp(img, row, col, color)

    if training_overlay is not None:
        draw(training_overlay, (0, 0, 0))
    if synthetic_overlay is not None:
        draw(synthetic_overlay, (255, 255, 255))
    return img


def _render_sweep(grid: GridField, lut) -> np.ndarray:
    n = len(grid.values)
    h, m = _SWEEP_HEIGHT, MARGIN_PX
    img = np.full((h + 2 * m, n * _SWEEP_COL_PX + 2 * m, 3), 255, dtype=np.uint8)

    def row_of(conf: float) -> int:
        return m + int(round((1.0 - conf) * (h - 1)))

    for i in range(n):
        q05, q25, q50, q75, q95 = grid.quantiles[i]
        c0 = m + i * _SWEEP_COL_PX
        c1 = c0 + _SWEEP_COL_PX
        img[row_of(q95) : row_of(q05) + 1, c0:c1] = lut[80]
        img[row_of(q75) : row_of(q25) + 1, c0:c1] = lut[160]
        img[row_of(q50) : row_of(q50) + 2, c0:c1] = lut[255]

    if grid.marker_value is not None:
        lo, hi = float(grid.values[0]), float(grid.values[-1])
        i = _to_pixel(float(grid.marker_value), lo, hi, n)
        c0 = m + i * _SWEEP_COL_PX + _SWEEP_COL_PX // 2
        img[m : m + h, c0 : c0 + 1] = (255, 255, 255)
    return img


def render_png(
    grid: GridField,
    colormap: str = "linear",
    training_overlay=None,
    synthetic_overlay=None,
) -> bytes:
    lut = colormap_lut(colormap)
    if grid.kind == "lattice":
        img = _render_lattice(grid, lut, training_overlay, synthetic_overlay)
    else:
        img = _render_sweep(grid, lut)
    return encode_png(img)
