"""Auto-associative MLP detector and its error-space Mahalanobis variant.

The network reconstructs standardized inputs through a one-unit bottleneck
(hidden sizes 16 x 1 x 16, tanh hiddens, linear output).  The plain score
is the per-point sum of squared reconstruction errors.  Because that sum
collapses the error direction, a second variant fits a Mahalanobis model
on the per-feature training errors and scores queries by the Mahalanobis
distance of their error vector, which sharpens detection whenever ID
errors are strongly structured.
"""

from dataclasses import dataclass, field

import numpy as np

from .._nn import DenseNet, fit_with_lr_backoff, mse_loss_grads, train_minibatch
from ..data import Dataset, Standardizer
from ..rng import substream
from .base import register_model, standardizer_arrays, standardizer_from_arrays
from .mahalanobis import MahalanobisModel, fit_mahalanobis

__all__ = ["AaHyperparams", "AaModel", "ErrorMahalanobisModel", "fit_autoassoc", "fit_md_aa"]


@dataclass(frozen=True)
class AaHyperparams:
    hidden: int = 16
    bottleneck: int = 1
    learning_rate: float = 1e-3
    batch_size: int = 32
    max_epochs: int = 2000
    plateau_epochs: int = 50


@register_model
@dataclass(frozen=True)
class AaModel:
    weights: list = field(repr=False)
    biases: list = field(repr=False)
    activations: list
    standardizer: Standardizer
    epochs_run: int

    kind = "autoassoc"

    def _net(self) -> DenseNet:
        return DenseNet(self.weights, self.biases, self.activations)

    def reconstruct(self, points) -> np.ndarray:
        """Reconstruction in standardized space."""
        z = self.standardizer.transform(np.asarray(points, dtype=float))
        return self._net().predict(z)

    def errors(self, points) -> np.ndarray:
        """Per-feature reconstruction errors (reconstruction minus input)."""
        z = self.standardizer.transform(np.asarray(points, dtype=float))
        return self._net().predict(z) - z

    def score(self, points) -> np.ndarray:
        return np.sum(self.errors(points) ** 2, axis=1)

    # alias matching the score's definition
    score_sse = score

    def _arrays(self):
        out = {**standardizer_arrays(self.standardizer)}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            out[f"w{i}"] = w
            out[f"b{i}"] = b
        return out

    def _scalars(self):
        return {
            "activations": self.activations,
            "n_layers": len(self.weights),
            "epochs_run": self.epochs_run,
        }

    @classmethod
    def _rebuild(cls, arrays, scalars):
        n = int(scalars["n_layers"])
        return cls(
            weights=[arrays[f"w{i}"] for i in range(n)],
            biases=[arrays[f"b{i}"] for i in range(n)],
            activations=list(scalars["activations"]),
            standardizer=standardizer_from_arrays(arrays),
            epochs_run=int(scalars["epochs_run"]),
        )


def fit_autoassoc(
    train: Dataset, hyperparams: AaHyperparams | None = None, seed: int = 0
) -> AaModel:
    """Train the bottleneck reconstructor by mini-batch Adam on standardized
    inputs; deterministic for a fixed seed; diverging runs restart with a
    10x smaller learning rate (at most twice)."""
    hp = hyperparams or AaHyperparams()
    x = train.points if isinstance(train, Dataset) else np.asarray(train, dtype=float)
    n, d = x.shape
    if n < 32:
        raise ValueError("need at least 32 training points")
    if not hp.bottleneck < d:
        raise ValueError("bottleneck width must be strictly smaller than the input dimension")
    std = Standardizer.fit(x)
    z = std.transform(x)
    sizes = [d, hp.hidden, hp.bottleneck, hp.hidden, d]
    activations = ["tanh", "tanh", "tanh", "linear"]

    def build_and_train(lr, attempt):
        net = DenseNet.init(sizes, activations, substream(seed, "aa-init", attempt))
        history = train_minibatch(
            net,
            n,
            lambda idx: mse_loss_grads(net, z[idx], z[idx]),
            substream(seed, "aa-shuffle", attempt),
            lr=lr,
            batch_size=hp.batch_size,
            max_epochs=hp.max_epochs,
            plateau_epochs=hp.plateau_epochs,
        )
        return net, len(history)

    net, epochs = fit_with_lr_backoff(build_and_train, hp.learning_rate)
    return AaModel(
        weights=net.weights,
        biases=net.biases,
        activations=activations,
        standardizer=std,
        epochs_run=epochs,
    )


@register_model
@dataclass(frozen=True)
class ErrorMahalanobisModel:
    aa: AaModel
    error_model: MahalanobisModel

    kind = "md_aa"

    def score(self, points) -> np.ndarray:
        return self.error_model.score(self.aa.errors(points))

    def _arrays(self):
        from .base import serialize_model

        return {
            "aa_blob": np.frombuffer(serialize_model(self.aa), dtype=np.uint8),
            "error_blob": np.frombuffer(serialize_model(self.error_model), dtype=np.uint8),
        }

    def _scalars(self):
        return {}

    @classmethod
    def _rebuild(cls, arrays, scalars):
        from .base import deserialize_model

        return cls(
            aa=deserialize_model(arrays["aa_blob"].tobytes()),
            error_model=deserialize_model(arrays["error_blob"].tobytes()),
        )


def fit_md_aa(train: Dataset, aa: AaModel) -> ErrorMahalanobisModel:
    """Mahalanobis model over the auto-associator's training error vectors."""
    x = train.points if isinstance(train, Dataset) else np.asarray(train, dtype=float)
    return ErrorMahalanobisModel(aa=aa, error_model=fit_mahalanobis(aa.errors(x)))
