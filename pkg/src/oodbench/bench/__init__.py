"""Benchmark harness: configuration, cell runner, grids, tables, PNGs."""

from .colormap import colormap_lut
from .config import BenchConfig, ConfigError, MethodConfig, ToyConfig, default_config, load_config, parse_config
from .grids import GridField, grid_from_csv, grid_to_csv
from .render import encode_png, render_png
from .runner import CellResult, RunResult, emit_grid, emit_table, run_benchmark

__all__ = [
    "BenchConfig",
    "CellResult",
    "ConfigError",
    "GridField",
    "MethodConfig",
    "RunResult",
    "ToyConfig",
    "colormap_lut",
    "default_config",
    "emit_grid",
    "emit_table",
    "encode_png",
    "grid_from_csv",
    "grid_to_csv",
    "load_config",
    "parse_config",
    "render_png",
    "run_benchmark",
]
