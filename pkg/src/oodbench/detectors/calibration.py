"""Validation-based confidence calibration.

A raw OOD score is mapped to the fraction of held-out validation scores
that are greater than or equal to it -- the empirical upper-tail p-value.
Deeply in-distribution queries score below most validation points and get
confidence near 1; queries beyond the validation maximum get 0.  Ties
count toward the validation side, which is conservative toward ID.
"""

from dataclasses import dataclass

import numpy as np

from .base import register_model

__all__ = ["Calibrator", "fit_calibrator", "calibrate_confidence"]


@register_model
@dataclass(frozen=True)
class Calibrator:
    """Sorted ascending raw OOD scores of an in-distribution validation set."""

    scores: np.ndarray

    kind = "calibrator"

    def __post_init__(self):
        s = np.asarray(self.scores, dtype=float)
        if s.ndim != 1 or s.size == 0:
            raise ValueError("calibrator needs a non-empty 1-D score vector")
        if np.any(np.diff(s) < 0):
            raise ValueError("calibrator scores must be sorted ascending")
        object.__setattr__(self, "scores", s)

    def _arrays(self):
        return {"scores": self.scores}

    def _scalars(self):
        return {}

    @classmethod
    def _rebuild(cls, arrays, scalars):
        return cls(scores=arrays["scores"])


def fit_calibrator(raw_scores) -> Calibrator:
    return Calibrator(scores=np.sort(np.asarray(raw_scores, dtype=float)))


def calibrate_confidence(cal: Calibrator, raw_scores) -> np.ndarray:
    """Confidence in [0, 1]: share of validation scores >= each raw score.

    Monotone non-increasing in the raw OOD score.
    """
    raw = np.asarray(raw_scores, dtype=float)
    n = cal.scores.size
    below = np.searchsorted(cal.scores, raw, side="left")
    return (n - below) / n
