"""The analytic reference detector: raw score = distance to the known ID
manifold of a toy.  One idealised baseline, not the only possible one."""

from dataclasses import dataclass

import numpy as np

from ..toys import CircleSpec, HaystackSpec, LineSpec, ToySpec, reference_ood_score
from .base import register_model

__all__ = ["ReferenceModel", "fit_reference"]


@register_model
@dataclass(frozen=True)
class ReferenceModel:
    spec: ToySpec

    kind = "reference"

    def score(self, points) -> np.ndarray:
        return reference_ood_score(self.spec, points)

    def _arrays(self):
        s = self.spec
        if s.kind == "line":
            return {
                "anchor": s.anchor,
                "direction": s.direction,
                "intervals": np.asarray(s.intervals, dtype=float),
            }
        if s.kind == "circle":
            return {"center": s.center}
        return {"mean": s.mean, "covariance": s.covariance}

    def _scalars(self):
        s = self.spec
        if s.kind == "line":
            return {"toy": "line", "noise_sigma": s.noise_sigma}
        if s.kind == "circle":
            return {
                "toy": "circle",
                "noise_sigma": s.noise_sigma,
                "base_radius": s.base_radius,
                "sine_amplitude": s.sine_amplitude,
                "sine_frequency": int(s.sine_frequency),
            }
        return {
            "toy": "haystack",
            "constant_feature_index": int(s.constant_feature_index),
            "constant_value": s.constant_value,
            "sweep_lo": s.sweep_range[0],
            "sweep_hi": s.sweep_range[1],
        }

    @classmethod
    def _rebuild(cls, arrays, scalars):
        toy = scalars["toy"]
        if toy == "line":
            ivals = arrays["intervals"]
            spec = LineSpec(
                anchor=arrays["anchor"],
                direction=arrays["direction"],
                intervals=((ivals[0, 0], ivals[0, 1]), (ivals[1, 0], ivals[1, 1])),
                noise_sigma=float(scalars["noise_sigma"]),
            )
        elif toy == "circle":
            spec = CircleSpec(
                center=arrays["center"],
                base_radius=float(scalars["base_radius"]),
                sine_amplitude=float(scalars["sine_amplitude"]),
                sine_frequency=int(scalars["sine_frequency"]),
                noise_sigma=float(scalars["noise_sigma"]),
            )
        else:
            spec = HaystackSpec(
                mean=arrays["mean"],
                covariance=arrays["covariance"],
                constant_feature_index=int(scalars["constant_feature_index"]),
                constant_value=float(scalars["constant_value"]),
                sweep_range=(float(scalars["sweep_lo"]), float(scalars["sweep_hi"])),
            )
        return cls(spec=spec)


def fit_reference(spec: ToySpec) -> ReferenceModel:
    return ReferenceModel(spec=spec)
