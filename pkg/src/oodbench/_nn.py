"""Minimal dense-network machinery with hand-written backprop.

Kept deliberately small: Glorot-initialised fully-connected layers, tanh /
relu / linear activations, Adam updates, and mini-batch loops with plateau
early stopping and divergence backoff.  Gradients are exact (they are
checked against central finite differences in the test suite).
"""

import numpy as np

__all__ = [
    "DenseNet",
    "Adam",
    "TrainingDiverged",
    "mse_loss_grads",
    "weighted_bce_loss_grads",
    "train_minibatch",
    "fit_with_lr_backoff",
]


class TrainingDiverged(RuntimeError):
    """Raised when a training loss stops being finite."""


def _act(name: str, z: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return np.tanh(z)
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "linear":
        return z
    raise ValueError(f"unknown activation {name!r}")


def _act_deriv(name: str, z: np.ndarray, h: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return 1.0 - h**2
    if name == "relu":
        return (z > 0).astype(float)
    if name == "linear":
        return np.ones_like(z)
    raise ValueError(f"unknown activation {name!r}")


class DenseNet:
    """Fully-connected network; one activation name per layer."""

    def __init__(self, weights, biases, activations):
        if not len(weights) == len(biases) == len(activations):
            raise ValueError("layer lists must have equal length")
        self.weights = [np.asarray(w, dtype=float) for w in weights]
        self.biases = [np.asarray(b, dtype=float) for b in biases]
        self.activations = list(activations)

    @classmethod
    def init(cls, sizes, activations, rng: np.random.Generator) -> "DenseNet":
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(weights, biases, activations)

    @property
    def sizes(self):
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def forward(self, x: np.ndarray):
        """Returns (output, caches); caches hold (input, pre-activation,
        activation) per layer for backprop."""
        h = np.asarray(x, dtype=float)
        caches = []
        for w, b, act in zip(self.weights, self.biases, self.activations):
            z = h @ w + b
            out = _act(act, z)
            caches.append((h, z, out))
            h = out
        return h, caches

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)[0]

    def backward(self, caches, delta_out: np.ndarray):
        """Gradients of a scalar loss given dL/d(final pre-activation is NOT
        assumed): ``delta_out`` is dL/d(output of the last layer)."""
        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.weights)
        delta = delta_out
        for layer in range(len(self.weights) - 1, -1, -1):
            h_in, z, h_out = caches[layer]
            dz = delta * _act_deriv(self.activations[layer], z, h_out)
            grads_w[layer] = h_in.T @ dz
            grads_b[layer] = dz.sum(axis=0)
            delta = dz @ self.weights[layer].T
        return grads_w, grads_b

    # flat-parameter helpers (used by the finite-difference checks)
    def get_flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.weights + self.biases])

    def set_flat(self, flat: np.ndarray) -> None:
        off = 0
        for group in (self.weights, self.biases):
            for i, p in enumerate(group):
                group[i] = flat[off : off + p.size].reshape(p.shape).copy()
                off += p.size


class Adam:
    def __init__(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = None
        self.v = None
        self.t = 0

    def step(self, params: list, grads: list) -> None:
        if self.m is None:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = b1 * self.m[i] + (1 - b1) * g
            self.v[i] = b2 * self.v[i] + (1 - b2) * g**2
            m_hat = self.m[i] / (1 - b1**self.t)
            v_hat = self.v[i] / (1 - b2**self.t)
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def mse_loss_grads(net: DenseNet, x: np.ndarray, target: np.ndarray):
    """Mean squared error over batch and output dimensions."""
    out, caches = net.forward(x)
    diff = out - target
    loss = float(np.mean(diff**2))
    gw, gb = net.backward(caches, 2.0 * diff / diff.size)
    return loss, gw + gb


def weighted_bce_loss_grads(net: DenseNet, x: np.ndarray, y: np.ndarray, w: np.ndarray):
    """Per-sample weighted binary cross-entropy on a single-logit output.

    Computed in the numerically stable logits form; the final layer must be
    linear.
    """
    z, caches = net.forward(x)
    z = z.ravel()
    total = float(w.sum())
    if total <= 0:
        raise ValueError("sample weights sum to zero")
    per = np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))
    loss = float((w * per).sum() / total)
    p = 1.0 / (1.0 + np.exp(-z))
    delta = (w * (p - y) / total)[:, None]
    gw, gb = net.backward(caches, delta)
    return loss, gw + gb


def train_minibatch(
    net: DenseNet,
    n_samples: int,
    batch_loss_grads,
    rng: np.random.Generator,
    lr: float,
    batch_size: int,
    max_epochs: int,
    plateau_epochs: int | None = None,
) -> list[float]:
    """Generic shuffled mini-batch loop; returns per-epoch mean losses.

    ``batch_loss_grads(idx)`` evaluates the loss and gradients on the batch
    rows ``idx``.  Raises TrainingDiverged on non-finite loss.
    """
    opt = Adam(lr=lr)
    params = net.weights + net.biases
    best = np.inf
    stall = 0
    history = []
    for _ in range(max_epochs):
        perm = rng.permutation(n_samples)
        losses = []
        for start in range(0, n_samples, batch_size):
            idx = perm[start : start + batch_size]
            loss, grads = batch_loss_grads(idx)
            if not np.isfinite(loss):
                raise TrainingDiverged(f"loss became {loss}")
            opt.step(params, grads)
            losses.append(loss)
        epoch_loss = float(np.mean(losses))
        history.append(epoch_loss)
        if epoch_loss < best * (1.0 - 1e-6):
            best = epoch_loss
            stall = 0
        else:
            stall += 1
            if plateau_epochs is not None and stall >= plateau_epochs:
                break
    return history


def fit_with_lr_backoff(build_and_train, lr: float, restarts: int = 2):
    """Run ``build_and_train(lr, attempt)``, retrying divergence with a 10x
    smaller learning rate at most ``restarts`` times."""
    for attempt in range(restarts + 1):
        try:
            return build_and_train(lr, attempt)
        except TrainingDiverged:
            if attempt == restarts:
                raise
            lr /= 10.0
    raise AssertionError("unreachable")
