"""Unsupervised OOD detectors behind one contract: fit on in-distribution
training points, score queries with a raw OOD score (higher = more OOD)."""

from .autoassoc import AaHyperparams, AaModel, ErrorMahalanobisModel, fit_autoassoc, fit_md_aa
from .base import MODEL_REGISTRY, deserialize_model, serialize_model
from .calibration import Calibrator, calibrate_confidence, fit_calibrator
from .gp import AaGpModel, GpModel, fit_aa_gp, fit_gp, fit_ncgp, gp_from_arrays
from .lof import LofModel, fit_lof
from .mahalanobis import MahalanobisModel, fit_mahalanobis
from .ocsvm import OcSvmModel, fit_ocsvm, rbf_kernel
from .pca import PcaTruncModel, fit_pca_trunc
from .reference import ReferenceModel, fit_reference

__all__ = [
    "AaGpModel",
    "AaHyperparams",
    "AaModel",
    "Calibrator",
    "ErrorMahalanobisModel",
    "GpModel",
    "LofModel",
    "MahalanobisModel",
    "MODEL_REGISTRY",
    "OcSvmModel",
    "PcaTruncModel",
    "ReferenceModel",
    "calibrate_confidence",
    "deserialize_model",
    "fit_aa_gp",
    "fit_autoassoc",
    "fit_calibrator",
    "fit_gp",
    "fit_lof",
    "fit_mahalanobis",
    "fit_md_aa",
    "fit_ncgp",
    "fit_ocsvm",
    "fit_pca_trunc",
    "fit_reference",
    "gp_from_arrays",
    "rbf_kernel",
    "serialize_model",
]
