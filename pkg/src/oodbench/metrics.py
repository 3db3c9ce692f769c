"""Soft-confusion metrics, ROC-AUC, and fit/score resource profiling.

Confidences are ID-oriented values in [0, 1].  The soft confusion matrix
sums confidences instead of thresholding them: the true-positive score is
the sum of confidences over truly-ID points, and the remaining entries
are the symmetric completions.
"""

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "SoftConfusion",
    "MetricsReport",
    "soft_confusion",
    "precision_f1",
    "roc_auc",
    "profile",
    "REPORT_COLUMNS",
]

REPORT_COLUMNS = (
    "detector",
    "toy",
    "precision",
    "f1",
    "roc_auc",
    "fit_time_s",
    "score_time_s",
    "memory_kib",
)


@dataclass(frozen=True)
class SoftConfusion:
    tp: float
    fp: float
    fn: float
    tn: float


@dataclass(frozen=True)
class MetricsReport:
    detector: str
    toy: str
    precision: float
    f1: float
    roc_auc: float
    fit_time_s: float
    score_time_s: float
    memory_kib: float


def _check_inputs(confidences, is_id) -> tuple[np.ndarray, np.ndarray]:
    conf = np.asarray(confidences, dtype=float)
    flags = np.asarray(is_id, dtype=bool)
    if conf.shape != flags.shape or conf.ndim != 1:
        raise ValueError("confidences and is_id must be 1-D vectors of equal length")
    if conf.size == 0:
        raise ValueError("empty input")
    return conf, flags


def soft_confusion(confidences, is_id) -> SoftConfusion:
    conf, flags = _check_inputs(confidences, is_id)
    if np.any(conf < 0) or np.any(conf > 1):
        raise ValueError("confidences must lie in [0, 1]")
    return SoftConfusion(
        tp=float(conf[flags].sum()),
        fp=float(conf[~flags].sum()),
        fn=float((1.0 - conf[flags]).sum()),
        tn=float((1.0 - conf[~flags]).sum()),
    )


def precision_f1(c: SoftConfusion) -> tuple[float, float]:
    """Precision and F1 from a soft confusion matrix; degenerate cases are 0."""
    precision = c.tp / (c.tp + c.fp) if c.tp + c.fp > 0 else 0.0
    recall = c.tp / (c.tp + c.fn) if c.tp + c.fn > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, f1


def roc_auc(confidences, is_id) -> float:
    """Probability that a random ID point outranks a random OOD point.

    Mann-Whitney rank statistic with midrank tie handling, O(n log n);
    exactly equal to the pairwise definition
    P(conf_ID > conf_OOD) + 0.5 * P(conf_ID = conf_OOD).
    """
    conf, flags = _check_inputs(confidences, is_id)
    n_id = int(flags.sum())
    n_ood = conf.size - n_id
    if n_id == 0 or n_ood == 0:
        raise ValueError("roc_auc needs at least one ID and one OOD point")

    order = np.argsort(conf, kind="stable")
    sorted_conf = conf[order]
    ranks = np.empty(conf.size, dtype=float)
    i = 0
    while i < conf.size:
        j = i
        while j + 1 < conf.size and sorted_conf[j + 1] == sorted_conf[i]:
            j += 1
        # midrank: ties share the average of ranks i+1 .. j+1 (dyadic, exact)
        ranks[order[i : j + 1]] = (i + j + 2) / 2.0
        i = j + 1
    u = ranks[flags].sum() - n_id * (n_id + 1) / 2.0
    return float(u / (n_id * n_ood))


def profile(
    fit_closure: Callable[[], object],
    score_closure: Callable[[], object],
    model_serializer: Callable[[], bytes],
    repeats: int = 3,
) -> tuple[float, float, float]:
    """Median wall-clock fit/score times over ``repeats`` runs plus the
    serialized model size in KiB.  Closures must be repeatable."""

    def _median_time(closure):
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            closure()
            times.append(time.perf_counter() - t0)
        return float(np.median(times))

    fit_time = _median_time(fit_closure)
    score_time = _median_time(score_closure)
    memory_kib = len(model_serializer()) / 1024.0
    return fit_time, score_time, memory_kib
