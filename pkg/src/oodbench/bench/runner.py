"""Benchmark orchestration: run every (method x toy) cell, emit metric
tables, confidence grids, and optional heatmap PNGs.

Every cell owns independent RNG substreams keyed by the master seed and
the cell labels, so results do not depend on scheduling and reruns with a
fixed seed produce byte-identical CSV outputs (timing columns are zero
unless profiling is enabled; wall-clock times are inherently
non-deterministic).  A failing cell is recorded and skipped without
affecting other cells.
"""

import io
import os
import tempfile
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from ..data import dataset_to_csv
from ..detectors import calibrate_confidence, fit_calibrator, serialize_model
from ..metrics import REPORT_COLUMNS, MetricsReport, precision_f1, profile, roc_auc, soft_confusion
from ..rng import derive_seed, substream
from ..synthesis import synthesised_set_to_csv
from ..toys import ToySpec, generate_toy, plotting_window, toy_spec
from .config import BenchConfig, MethodConfig, resolved_params
from .grids import SWEEP_QUANTILES, GridField, grid_to_csv
from .methods import build_detector, build_synthesiser
from .render import render_png

__all__ = ["run_benchmark", "emit_grid", "emit_table", "RunResult", "CellResult"]

_FLOAT = "{:.17g}".format

SWEEP_VALUES = 101
SWEEP_SAMPLES = 1000


@dataclass(frozen=True)
class CellResult:
    toy: str
    method: str
    report: Optional[MetricsReport]
    grid: Optional[GridField]
    synth_csv: Optional[str]
    train_points: Optional[np.ndarray]
    synth_points: Optional[np.ndarray]
    error: Optional[str] = None


@dataclass(frozen=True)
class RunResult:
    out_dir: Path
    reports: tuple
    failures: tuple  # (toy, method, error) triples

    @property
    def ok(self) -> bool:
        return not self.failures


def emit_grid(
    confidence_fn: Callable[[np.ndarray], np.ndarray],
    spec: ToySpec,
    resolution: int,
    method: str = "",
    rng: Optional[np.random.Generator] = None,
    sweep_values: int = SWEEP_VALUES,
    sweep_samples: int = SWEEP_SAMPLES,
) -> GridField:
    """Evaluate a calibrated confidence function over a toy's display field.

    2-D toys: an R x R lattice over the plotting window, row-major (y
    outer, x inner).  Haystack: for each sweep value of the pinned feature,
    confidence quantiles over fresh draws from the base distribution with
    that feature pinned.
    """
    if spec.kind in ("line", "circle"):
        (x0, x1), (y0, y1) = plotting_window(spec)
        xs = np.linspace(x0, x1, resolution)
        ys = np.linspace(y0, y1, resolution)
        mx, my = np.meshgrid(xs, ys, indexing="xy")
        pts = np.column_stack([mx.ravel(), my.ravel()])  # y outer, x inner
        conf = np.asarray(confidence_fn(pts), dtype=float).reshape(resolution, resolution)
        return GridField(
            toy=spec.kind, method=method, kind="lattice", xs=xs, ys=ys, confidence=conf
        )

    rng = rng if rng is not None else substream(0, "grid-sweep")
    lo, hi = spec.sweep_range
    values = np.linspace(lo, hi, sweep_values)
    base = rng.standard_normal((sweep_samples, spec.dim)) @ spec._chol.T + spec.mean
    quants = np.empty((sweep_values, len(SWEEP_QUANTILES)))
    for i, v in enumerate(values):
        pts = base.copy()
        pts[:, spec.constant_feature_index] = v
        conf = np.asarray(confidence_fn(pts), dtype=float)
        quants[i] = np.quantile(conf, SWEEP_QUANTILES)
    return GridField(
        toy=spec.kind,
        method=method,
        kind="sweep",
        values=values,
        quantiles=quants,
        marker_value=spec.constant_value,
    )


def emit_table(reports) -> tuple[str, str]:
    """(CSV text, aligned text table).  The CSV has one row per (method,
    toy) pair; the text table groups the three toys per method as L / C / H
    columns."""
    if not reports:
        raise ValueError("need at least one report")
    csv_out = io.StringIO()
    csv_out.write(",".join(REPORT_COLUMNS) + "\n")
    for r in reports:
        csv_out.write(
            ",".join(
                [
                    r.detector,
                    r.toy,
                    _FLOAT(r.precision),
                    _FLOAT(r.f1),
                    _FLOAT(r.roc_auc),
                    _FLOAT(r.fit_time_s),
                    _FLOAT(r.score_time_s),
                    _FLOAT(r.memory_kib),
                ]
            )
            + "\n"
        )

    toy_order = ("line", "circle", "haystack")
    methods = []
    for r in reports:
        if r.detector not in methods:
            methods.append(r.detector)
    by_cell = {(r.detector, r.toy): r for r in reports}

    def fmt3(method, attr):
        vals = []
        for toy in toy_order:
            r = by_cell.get((method, toy))
            vals.append("-" if r is None else f"{getattr(r, attr):.3g}")
        return " / ".join(vals)

    headers = ["method", "precision", "f1", "roc_auc", "fit[s]", "score[s]", "mem[KiB]"]
    attrs = ["precision", "f1", "roc_auc", "fit_time_s", "score_time_s", "memory_kib"]
    rows = [[m] + [fmt3(m, a) for a in attrs] for m in methods]
    widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(headers)]
    txt_lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
        "  ".join("-" * w for w in widths),
    ]
    txt_lines += ["  ".join(c.ljust(widths[i]) for i, c in enumerate(row)) for row in rows]
    txt_lines.append("toys per column: L(ine) / C(ircle) / H(aystack)")
    return csv_out.getvalue(), "\n".join(txt_lines) + "\n"


def _run_cell(
    config: BenchConfig, toy_name: str, spec: ToySpec, splits, method: MethodConfig
) -> CellResult:
    params = resolved_params(method)
    seed = derive_seed(config.master_seed, toy_name, method.group, method.label)
    try:
        if method.group == "detector":
            model = build_detector(method.name, spec, splits.train, seed, params)
            cal = fit_calibrator(model.score(splits.valid.points))

            def conf_fn(points):
                return calibrate_confidence(cal, model.score(points))

            synth = None
        else:
            synth, det = build_synthesiser(
                method.name, spec, splits.train, splits.valid, seed, params
            )
            model = det
            conf_fn = det.confidence

        conf_test = conf_fn(splits.test.points)
        sc = soft_confusion(conf_test, splits.test_is_id)
        prec, f1 = precision_f1(sc)
        auc = roc_auc(conf_test, splits.test_is_id)

        fit_time = score_time = 0.0
        memory_kib = len(serialize_model(model)) / 1024.0
        if config.profile:
            if method.group == "detector":
                fit_closure = lambda: build_detector(method.name, spec, splits.train, seed, params)
            else:
                fit_closure = lambda: build_synthesiser(
                    method.name, spec, splits.train, splits.valid, seed, params
                )
            fit_time, score_time, memory_kib = profile(
                fit_closure, lambda: conf_fn(splits.test.points), lambda: serialize_model(model)
            )

        grid = emit_grid(
            conf_fn,
            spec,
            config.resolution,
            method=method.label,
            rng=substream(config.master_seed, toy_name, method.label, "grid"),
        )
        report = MetricsReport(
            detector=method.label,
            toy=toy_name,
            precision=prec,
            f1=f1,
            roc_auc=auc,
            fit_time_s=fit_time,
            score_time_s=score_time,
            memory_kib=memory_kib,
        )
        return CellResult(
            toy=toy_name,
            method=method.label,
            report=report,
            grid=grid,
            synth_csv=synthesised_set_to_csv(synth) if synth is not None else None,
            train_points=splits.train.points,
            synth_points=synth.points if synth is not None else None,
        )
    except Exception:
        return CellResult(
            toy=toy_name,
            method=method.label,
            report=None,
            grid=None,
            synth_csv=None,
            train_points=None,
            synth_points=None,
            error=traceback.format_exc(limit=8),
        )


def _write_atomic(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_benchmark(
    config: BenchConfig, out_dir, jobs: int = 1, plot: bool = False
) -> RunResult:
    """Run all cells, returning reports and failures; writes table.csv /
    table.txt, per-cell grid CSVs, dataset exports, synthesised-point CSVs,
    and (optionally) PNG heatmaps under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    toys = []
    for tc in config.toys:
        spec = toy_spec(tc.name, **tc.overrides)
        splits = generate_toy(
            spec, config.master_seed, config.n_train, config.n_valid, config.n_test
        )
        toys.append((tc.name, spec, splits))
        for split_name, ds, flags in (
            ("train", splits.train, None),
            ("valid", splits.valid, None),
            ("test", splits.test, splits.test_is_id),
        ):
            _write_atomic(out / "datasets" / f"{tc.name}_{split_name}.csv", dataset_to_csv(ds, flags))

    cells = [
        (toy_name, spec, splits, method)
        for toy_name, spec, splits in toys
        for method in config.methods
    ]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda c: _run_cell(config, *c), cells))
    else:
        results = [_run_cell(config, *cell) for cell in cells]

    reports, failures = [], []
    for res in results:
        if res.error is not None:
            failures.append((res.toy, res.method, res.error))
            continue
        reports.append(res.report)
        base = f"{res.toy}__{res.method}"
        _write_atomic(out / "grids" / f"{base}.csv", grid_to_csv(res.grid))
        if res.synth_csv is not None:
            _write_atomic(out / "synth" / f"{base}.csv", res.synth_csv)
        if plot:
            png = render_png(
                res.grid,
                colormap=config.colormap,
                training_overlay=res.train_points if res.grid.kind == "lattice" else None,
                synthetic_overlay=res.synth_points if res.grid.kind == "lattice" else None,
            )
            _write_atomic(out / "plots" / f"{base}.png", png)

    if reports:
        csv_text, txt_text = emit_table(reports)
        _write_atomic(out / "table.csv", csv_text)
        _write_atomic(out / "table.txt", txt_text)
    if failures:
        lines = [f"{toy},{method}\n{err}\n" for toy, method, err in failures]
        _write_atomic(out / "failures.txt", "".join(lines))

    return RunResult(out_dir=out, reports=tuple(reports), failures=tuple(failures))
