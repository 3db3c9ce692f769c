"""The ``oodbench`` command line.

    oodbench run --config bench.toml --out results/ [--jobs N] [--seed S]
                 [--plot] [--profile]
    oodbench table results/ [--format csv|txt]
    oodbench grid --toy line --method gp --resolution 64 --out grid.csv
    oodbench plot grid.csv --out grid.png [--colormap linear] [--marker V]
                 [--train-csv f.csv] [--synth-csv f.csv]

Exit codes: 0 on success, 1 on configuration/usage errors, 2 when some
benchmark cells failed (remaining cells are still written).
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from ..data import dataset_from_csv
from ..detectors import calibrate_confidence, fit_calibrator
from ..rng import derive_seed
from ..toys import TOY_NAMES, generate_toy, toy_spec
from .config import (
    ConfigError,
    MethodConfig,
    default_config,
    load_config,
    resolved_params,
)
from .grids import grid_from_csv, grid_to_csv
from .methods import DETECTOR_SCHEMAS, SYNTHESISER_SCHEMAS, build_detector, build_synthesiser
from .render import render_png
from .runner import emit_grid, emit_table, run_benchmark

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on usage errors; the benchmark reserves 2
    for partial cell failures, so remap usage problems to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="oodbench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run a configured benchmark")
    run.add_argument("--config", required=True, help="TOML configuration file")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--jobs", type=int, default=1, help="concurrent cells")
    run.add_argument("--seed", type=int, default=None, help="override the master seed")
    run.add_argument("--plot", action="store_true", help="also write PNG heatmaps")
    run.add_argument("--profile", action="store_true", help="measure fit/score times")

    table = sub.add_parser("table", help="print the metrics table of a finished run")
    table.add_argument("dir", help="benchmark output directory")
    table.add_argument("--format", choices=("csv", "txt"), default="txt")

    grid = sub.add_parser("grid", help="fit one method on one toy and emit its grid CSV")
    grid.add_argument("--toy", required=True, choices=TOY_NAMES)
    grid.add_argument("--method", required=True)
    grid.add_argument("--resolution", type=int, default=64)
    grid.add_argument("--out", required=True)
    grid.add_argument("--seed", type=int, default=42)
    grid.add_argument("--n-train", type=int, default=1000)
    grid.add_argument("--n-valid", type=int, default=1000)

    plot = sub.add_parser("plot", help="render a grid CSV as a PNG heatmap")
    plot.add_argument("grid_csv")
    plot.add_argument("--out", required=True)
    plot.add_argument("--colormap", default="linear")
    plot.add_argument("--marker", type=float, default=None, help="sweep marker value")
    plot.add_argument("--train-csv", default=None, help="dataset CSV for black markers")
    plot.add_argument("--synth-csv", default=None, help="synthesised CSV for white markers")
    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = replace(config, master_seed=args.seed)
    if args.profile:
        config = replace(config, profile=True)
    result = run_benchmark(config, args.out, jobs=args.jobs, plot=args.plot)
    print(f"{len(result.reports)} cell(s) written to {result.out_dir}")
    if result.failures:
        for toy, method, _ in result.failures:
            print(f"cell failed: {toy} x {method} (see failures.txt)", file=sys.stderr)
        return 2
    return 0


def _cmd_table(args) -> int:
    table_csv = Path(args.dir) / "table.csv"
    if not table_csv.exists():
        raise ConfigError(f"no table.csv in {args.dir}; run the benchmark first")
    text = table_csv.read_text()
    if args.format == "csv":
        print(text, end="")
        return 0
    from ..metrics import MetricsReport

    reports = []
    for line in text.splitlines()[1:]:
        cells = line.split(",")
        reports.append(
            MetricsReport(cells[0], cells[1], *(float(v) for v in cells[2:8]))
        )
    print(emit_table(reports)[1], end="")
    return 0


def _cmd_grid(args) -> int:
    name = args.method
    if name in DETECTOR_SCHEMAS:
        group = "detector"
    elif name in SYNTHESISER_SCHEMAS:
        group = "synthesiser"
    else:
        known = sorted(set(DETECTOR_SCHEMAS) | set(SYNTHESISER_SCHEMAS))
        raise ConfigError(f"unknown method {name!r}; available: {known}")

    spec = toy_spec(args.toy)
    splits = generate_toy(spec, args.seed, args.n_train, args.n_valid, 2)
    method = MethodConfig(name=name, group=group)
    params = resolved_params(method)
    seed = derive_seed(args.seed, args.toy, group, method.label)
    if group == "detector":
        model = build_detector(name, spec, splits.train, seed, params)
        cal = fit_calibrator(model.score(splits.valid.points))
        conf_fn = lambda pts: calibrate_confidence(cal, model.score(pts))
    else:
        _, det = build_synthesiser(name, spec, splits.train, splits.valid, seed, params)
        conf_fn = det.confidence
    grid = emit_grid(
        conf_fn,
        spec,
        args.resolution,
        method=name,
        rng=None,
    )
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(grid_to_csv(grid))
    print(f"grid written to {args.out}")
    return 0


def _cmd_plot(args) -> int:
    try:
        text = Path(args.grid_csv).read_text()
    except OSError as exc:
        raise ConfigError(str(exc)) from exc
    grid = grid_from_csv(text, marker_value=args.marker)

    def load_points(path):
        if path is None:
            return None
        ds, _ = dataset_from_csv(Path(path).read_text())
        return ds.points

    png = render_png(
        grid,
        colormap=args.colormap,
        training_overlay=load_points(args.train_csv),
        synthetic_overlay=load_points(args.synth_csv),
    )
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_bytes(png)
    print(f"PNG written to {args.out}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "table": _cmd_table, "grid": _cmd_grid, "plot": _cmd_plot}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
