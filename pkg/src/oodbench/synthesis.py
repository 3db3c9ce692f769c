"""Synthetic-OOD generation and the supervised detector trained on it.

Pipeline: sample fresh in-distribution points by kernel-density sampling
from the training set, then push them off-manifold with the fast gradient
sign method driven by the analytic reference detector's error gradient
(the best-case setup: ideal gradients).  Step sizes are either constant,
drawn uniformly, or adapted by an annealed multiplicative search that
pokes the step down while a confidence criterion holds and backs off when
it fails.  A plain uniform-box sampler is included as the baseline.

The supervised detector is an MLP classifier (one hidden layer of 100
rectified-linear units, logistic output) trained on ID versus synthetic
OOD inputs with per-sample weights; its ID-class probability is the
confidence.
"""

import io
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union

import numpy as np

from ._nn import DenseNet, fit_with_lr_backoff, train_minibatch, weighted_bce_loss_grads
from .data import Dataset, Standardizer
from .detectors.base import register_model, standardizer_arrays, standardizer_from_arrays
from .rng import derive_seed, substream
from .toys import ToySpec, reference_error_gradient

__all__ = [
    "SynthesisConfig",
    "SynthesisedSet",
    "ClassifierHyperparams",
    "SupervisedDetector",
    "TPokeState",
    "scott_bandwidth",
    "median_nn_bandwidth",
    "sample_uniform_ood",
    "sample_kde_id",
    "fgsm_perturb",
    "synthesise_fgsm",
    "train_supervised",
    "confidence",
    "tpoke",
    "synthesised_set_to_csv",
]

FGSM_METHODS = ("fgsm_constant", "fgsm_uniform", "fgsm_tpoke")


@dataclass(frozen=True)
class SynthesisConfig:
    """How to synthesise OOD points.

    method: "uniform_box", "fgsm_constant" (uses ``step``), "fgsm_uniform"
    (uses ``step_lo``/``step_hi``) or "fgsm_tpoke" (step driven externally).
    ``kde_bandwidth`` None selects the median nearest-neighbour distance of
    the training points, a scale that tracks the ID manifold and stays
    positive in every coordinate.
    """

    method: str
    n_ood: Optional[int] = None  # None: match the training-set size
    step: float = 1.0
    step_lo: float = 0.0
    step_hi: float = 1.0
    kde_bandwidth: Union[float, np.ndarray, None] = None
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("uniform_box",) + FGSM_METHODS:
            raise ValueError(f"unknown synthesis method {self.method!r}")
        if self.n_ood is not None and self.n_ood < 1:
            raise ValueError("n_ood must be >= 1")
        if self.method == "fgsm_constant" and not self.step > 0:
            raise ValueError("constant FGSM step must be positive")
        if self.method == "fgsm_uniform" and not self.step_lo < self.step_hi:
            raise ValueError("FGSM step range must satisfy lo < hi")


@dataclass(frozen=True)
class SynthesisedSet:
    """Synthetic OOD points with their FGSM steps and training weights."""

    points: np.ndarray
    step_sizes: Optional[np.ndarray] = None
    weights: np.ndarray = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        if self.step_sizes is not None:
            object.__setattr__(self, "step_sizes", np.asarray(self.step_sizes, dtype=float))
        w = np.ones(len(pts)) if self.weights is None else np.asarray(self.weights, dtype=float)
        if w.shape != (len(pts),):
            raise ValueError("weights length must match points")
        if np.any(w < 0) or np.any(w > 1):
            raise ValueError("weights must lie in [0, 1]")
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.points)


def scott_bandwidth(points: np.ndarray) -> np.ndarray:
    """Per-feature Scott-rule bandwidth, n^(-1/(d+4)) times the feature std."""
    x = np.asarray(points, dtype=float)
    n, d = x.shape
    return n ** (-1.0 / (d + 4)) * x.std(axis=0)


def median_nn_bandwidth(points: np.ndarray) -> float:
    """Median nearest-neighbour distance of the points.

    The default bandwidth for synthesising fresh ID inputs: unlike
    variance-based rules it follows the local scale of manifold-shaped
    training data and is positive even when single features are constant,
    so a gradient-sign step is never frozen at an exact error minimum.
    """
    from scipy.spatial.distance import cdist

    x = np.asarray(points, dtype=float)
    if len(x) < 2:
        return 1.0
    d = cdist(x, x)
    np.fill_diagonal(d, np.inf)
    med = float(np.median(d.min(axis=1)))
    return med if med > 0 else 1.0


def sample_uniform_ood(train: Dataset, n: int, seed: int = 0) -> SynthesisedSet:
    """Per-feature uniform samples over the training range; a degenerate
    feature (min = max) yields its constant."""
    if n < 1:
        raise ValueError("n must be >= 1")
    x = train.points if isinstance(train, Dataset) else np.asarray(train, dtype=float)
    lo, hi = x.min(axis=0), x.max(axis=0)
    pts = substream(seed, "uniform-ood").uniform(lo, hi, size=(n, x.shape[1]))
    return SynthesisedSet(points=pts)


def sample_kde_id(train: Dataset, bandwidth, n: int, seed: int = 0) -> np.ndarray:
    """Sample a Gaussian-kernel density estimate of the training points:
    a uniformly chosen training point plus per-feature noise of std
    ``bandwidth`` (scalar or per-feature)."""
    x = train.points if isinstance(train, Dataset) else np.asarray(train, dtype=float)
    bw = np.broadcast_to(np.asarray(bandwidth, dtype=float), (x.shape[1],))
    if np.any(bw < 0):
        raise ValueError("bandwidth must be non-negative")
    rng = substream(seed, "kde-sample")
    idx = rng.integers(0, len(x), size=n)
    return x[idx] + rng.standard_normal((n, x.shape[1])) * bw


def fgsm_perturb(points: np.ndarray, steps: np.ndarray, grads: np.ndarray) -> np.ndarray:
    """x + step * sign(grad) elementwise, with sign(0) = 0."""
    pts = np.asarray(points, dtype=float)
    grads = np.asarray(grads, dtype=float)
    steps = np.asarray(steps, dtype=float)
    if grads.shape != pts.shape:
        raise ValueError("gradient shape must match points")
    if steps.shape != (len(pts),):
        raise ValueError("steps must be a per-point vector")
    if np.any(steps < 0):
        raise ValueError("steps must be non-negative")
    return pts + steps[:, None] * np.sign(grads)


def synthesise_fgsm(train: Dataset, spec: ToySpec, config: SynthesisConfig) -> SynthesisedSet:
    """KDE-sample ID points, draw a step per point, and ascend the reference
    detector's squared-error gradient."""
    if config.method not in FGSM_METHODS:
        raise ValueError(f"config.method must be an FGSM variant, got {config.method!r}")
    x = train.points if isinstance(train, Dataset) else np.asarray(train, dtype=float)
    n = config.n_ood if config.n_ood is not None else len(x)
    bw = config.kde_bandwidth if config.kde_bandwidth is not None else median_nn_bandwidth(x)
    base = sample_kde_id(train, bw, n, seed=config.seed)
    if config.method == "fgsm_uniform":
        steps = substream(config.seed, "fgsm-steps").uniform(config.step_lo, config.step_hi, n)
    else:
        steps = np.full(n, config.step)
    grads = reference_error_gradient(spec, base)
    return SynthesisedSet(points=fgsm_perturb(base, steps, grads), step_sizes=steps)


@dataclass(frozen=True)
class ClassifierHyperparams:
    hidden: int = 100
    learning_rate: float = 1e-3
    batch_size: int = 200
    max_epochs: int = 200


@register_model
@dataclass(frozen=True)
class SupervisedDetector:
    """MLP classifier of ID (label 1) versus synthetic OOD (label 0)."""

    weights: list = field(repr=False)
    biases: list = field(repr=False)
    standardizer: Standardizer

    kind = "supervised"

    def _net(self) -> DenseNet:
        return DenseNet(self.weights, self.biases, ["relu", "linear"])

    def logits(self, points) -> np.ndarray:
        z = self.standardizer.transform(np.asarray(points, dtype=float))
        return self._net().predict(z).ravel()

    def confidence(self, points) -> np.ndarray:
        """ID-class probability per point."""
        return 1.0 / (1.0 + np.exp(-self.logits(points)))

    def score(self, points) -> np.ndarray:
        """Raw OOD score: higher = more OOD."""
        return -self.logits(points)

    def _arrays(self):
        out = {**standardizer_arrays(self.standardizer)}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            out[f"w{i}"] = w
            out[f"b{i}"] = b
        return out

    def _scalars(self):
        return {"n_layers": len(self.weights)}

    @classmethod
    def _rebuild(cls, arrays, scalars):
        n = int(scalars["n_layers"])
        return cls(
            weights=[arrays[f"w{i}"] for i in range(n)],
            biases=[arrays[f"b{i}"] for i in range(n)],
            standardizer=standardizer_from_arrays(arrays),
        )


def train_supervised(
    id_points,
    ood_set: Union[SynthesisedSet, np.ndarray],
    seed: int = 0,
    hyperparams: ClassifierHyperparams | None = None,
) -> SupervisedDetector:
    """Weighted binary cross-entropy training; ID samples weigh 1, OOD
    samples carry the synthesised set's weights.  Deterministic per seed."""
    hp = hyperparams or ClassifierHyperparams()
    xi = id_points.points if isinstance(id_points, Dataset) else np.asarray(id_points, dtype=float)
    if isinstance(ood_set, SynthesisedSet):
        xo, wo = ood_set.points, ood_set.weights
    else:
        xo = np.asarray(ood_set, dtype=float)
        wo = np.ones(len(xo))
    if len(xi) == 0 or len(xo) == 0:
        raise ValueError("both classes must be non-empty")

    x = np.vstack([xi, xo])
    y = np.concatenate([np.ones(len(xi)), np.zeros(len(xo))])
    w = np.concatenate([np.ones(len(xi)), wo])
    std = Standardizer.fit(x)
    z = std.transform(x)
    sizes = [x.shape[1], hp.hidden, 1]

    def build_and_train(lr, attempt):
        net = DenseNet.init(sizes, ["relu", "linear"], substream(seed, "sup-init", attempt))
        train_minibatch(
            net,
            len(z),
            lambda idx: weighted_bce_loss_grads(net, z[idx], y[idx], w[idx]),
            substream(seed, "sup-shuffle", attempt),
            lr=lr,
            batch_size=hp.batch_size,
            max_epochs=hp.max_epochs,
        )
        return net

    net = fit_with_lr_backoff(build_and_train, hp.learning_rate)
    return SupervisedDetector(weights=net.weights, biases=net.biases, standardizer=std)


def confidence(det: SupervisedDetector, points) -> np.ndarray:
    return det.confidence(points)


@dataclass(frozen=True)
class TPokeState:
    """State of the annealed multiplicative step-size search.

    While the detector keeps the criterion satisfied the step shrinks by
    ``poke_factor`` (< 1); on failure it grows by ``backoff_factor`` (> 1).
    Both factors decay toward 1 geometrically (f <- f ** anneal_rate), so
    log(t) is a bounded walk with geometrically shrinking increments and t
    converges.
    """

    t: float = 1.0
    backoff_factor: float = 2.0
    poke_factor: float = 0.5
    anneal_rate: float = 0.9
    criterion_threshold: float = 0.95
    iteration: int = 0
    converged: bool = False
    history: tuple = ()

    _FACTOR_TOL = 1e-3

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("t must stay positive")
        if not self.backoff_factor > 1:
            raise ValueError("backoff factor must exceed 1")
        if not 0 < self.poke_factor < 1:
            raise ValueError("poke factor must lie in (0, 1)")
        if not 0 < self.anneal_rate < 1:
            raise ValueError("anneal rate must lie in (0, 1)")

    @property
    def factors_converged(self) -> bool:
        return max(self.backoff_factor, 1.0 / self.poke_factor) < 1.0 + self._FACTOR_TOL


def tpoke(
    train: Dataset,
    valid: Dataset,
    spec: ToySpec,
    initial: TPokeState,
    max_cycles: int = 30,
    seed: int = 0,
    n_ood: Optional[int] = None,
    kde_bandwidth=None,
    step_mode: str = "constant",
    criterion: Optional[Callable[[SupervisedDetector, float], bool]] = None,
    hyperparams: ClassifierHyperparams | None = None,
) -> tuple[TPokeState, SupervisedDetector]:
    """Adaptive FGSM step-size search over full training cycles.

    Each cycle synthesises OOD points with the current step t (``step_mode``
    "constant" uses t itself, "uniform" draws from U(0, t)), retrains the
    supervised detector from scratch, and evaluates the criterion (default:
    mean ID confidence on the validation set >= the state's threshold).
    Returns the annealed state plus the most recent detector that satisfied
    the criterion (the last trained one if none ever did, with
    ``converged`` False).
    """
    if max_cycles < 1:
        raise ValueError("max_cycles must be >= 1")
    if step_mode not in ("constant", "uniform"):
        raise ValueError("step_mode must be 'constant' or 'uniform'")

    state = initial
    detector = None
    passing_detector = None
    any_passed = False
    for cycle in range(max_cycles):
        cycle_seed = derive_seed(seed, "tpoke", cycle)
        if step_mode == "constant":
            cfg = SynthesisConfig(
                method="fgsm_constant",
                step=state.t,
                n_ood=n_ood,
                kde_bandwidth=kde_bandwidth,
                seed=cycle_seed,
            )
        else:
            cfg = SynthesisConfig(
                method="fgsm_uniform",
                step_lo=0.0,
                step_hi=state.t,
                n_ood=n_ood,
                kde_bandwidth=kde_bandwidth,
                seed=cycle_seed,
            )
        ood = synthesise_fgsm(train, spec, cfg)
        detector = train_supervised(train, ood, seed=cfg.seed, hyperparams=hyperparams)
        if criterion is not None:
            passed = bool(criterion(detector, state.t))
            mean_conf = float("nan")
        else:
            mean_conf = float(detector.confidence(valid.points).mean())
            passed = mean_conf >= state.criterion_threshold
        if passed:
            passing_detector = detector
            any_passed = True

        factor = state.poke_factor if passed else state.backoff_factor
        state = replace(
            state,
            t=state.t * factor,
            backoff_factor=state.backoff_factor**state.anneal_rate,
            poke_factor=state.poke_factor**state.anneal_rate,
            iteration=state.iteration + 1,
            history=state.history + ((state.t, passed, mean_conf),),
        )
        if state.factors_converged:
            break

    state = replace(state, converged=state.factors_converged and any_passed)
    return state, (passing_detector if passing_detector is not None else detector)


def synthesised_set_to_csv(s: SynthesisedSet) -> str:
    """CSV with header ``x0,...,xD-1,step,weight``; non-FGSM sets write 0
    for the step."""
    d = s.points.shape[1]
    steps = s.step_sizes if s.step_sizes is not None else np.zeros(len(s))
    out = io.StringIO()
    out.write(",".join([f"x{i}" for i in range(d)] + ["step", "weight"]) + "\n")
    for row, st, w in zip(s.points, steps, s.weights):
        cells = [f"{v:.17g}" for v in row] + [f"{st:.17g}", f"{w:.17g}"]
        out.write(",".join(cells) + "\n")
    return out.getvalue()
