"""oodbench: visual toy benchmarks for out-of-distribution detection.

Three procedurally generated toy examples (a 2-D line, a sine-displaced
circle, and a 10-D "haystack" with one pinned feature) with known ground
truth, a zoo of unsupervised OOD detectors behind a single fit/score
contract, confidence calibration against a validation set, synthetic-OOD
generation for supervised detectors (uniform sampling, KDE + gradient-sign
perturbation, adaptive step search), OOD sample weighting, and a benchmark
harness producing metric tables, confidence grids, and heatmaps.
"""

from . import bench, detectors, metrics, synthesis, toys, weighting
from .data import Dataset, LabeledSplits, Standardizer, dataset_from_csv, dataset_to_csv
from .detectors import (
    Calibrator,
    calibrate_confidence,
    deserialize_model,
    fit_aa_gp,
    fit_autoassoc,
    fit_calibrator,
    fit_gp,
    fit_lof,
    fit_mahalanobis,
    fit_md_aa,
    fit_ncgp,
    fit_ocsvm,
    fit_pca_trunc,
    fit_reference,
    serialize_model,
)
from .metrics import MetricsReport, SoftConfusion, precision_f1, profile, roc_auc, soft_confusion
from .rng import derive_seed, substream
from .synthesis import (
    SupervisedDetector,
    SynthesisConfig,
    SynthesisedSet,
    TPokeState,
    confidence,
    fgsm_perturb,
    sample_kde_id,
    sample_uniform_ood,
    synthesise_fgsm,
    tpoke,
    train_supervised,
)
from .toys import (
    CircleSpec,
    HaystackSpec,
    LineSpec,
    ToySpec,
    circle_spec,
    generate_toy,
    ground_truth_id,
    haystack_spec,
    line_spec,
    plotting_window,
    reference_error_gradient,
    reference_ood_score,
    toy_spec,
)
from .weighting import (
    PdfProxy,
    WeightingContext,
    estimate_pdf,
    id_weight,
    ood_weight,
    rescale_dominate,
    weight_synthesised_set,
)

__version__ = "0.1.0"
