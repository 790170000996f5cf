"""Mini-batch training of :class:`NetworkSpec` regressors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .network import (
    NetworkSpec,
    ShapeMismatch,
    backward_pass,
    forward_pass,
    init_weights,
    rng_streams,
)


class TrainingError(ValueError):
    pass


class EmptyDataset(TrainingError):
    pass


class DivergedLoss(TrainingError):
    def __init__(self, epoch: int, loss: float):
        super().__init__(f"training loss became {loss} at epoch {epoch}")
        self.epoch = epoch
        self.loss = loss


@dataclass(frozen=True)
class Hyperparams:
    epochs: int = 500
    batch_size: int = 32
    learning_rate: float = 1e-3
    optimizer: Literal["adam", "sgd"] = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")

    def to_dict(self) -> dict:
        return {
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "optimizer": self.optimizer,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "epsilon": self.epsilon,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Hyperparams":
        return cls(**{k: data[k] for k in cls().to_dict() if k in data})


@dataclass(frozen=True)
class Scaler:
    """Per-feature z-score standardisation."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray) -> "Scaler":
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        # constant features pass through centred but unscaled
        std = np.where(std > 0, std, 1.0)
        return cls(mean, std)

    @classmethod
    def identity(cls, width: int) -> "Scaler":
        return cls(np.zeros(width), np.ones(width))

    def transform(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.mean) / self.std


@dataclass(frozen=True, eq=False)
class TrainedModel:
    spec: NetworkSpec
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    scaler: Scaler
    loss_trace: tuple[float, ...] = field(default=())

    @classmethod
    def initial(cls, spec: NetworkSpec, scaler: Scaler | None = None) -> "TrainedModel":
        """Untrained model holding the seeded initial weights."""
        weights, biases = init_weights(spec)
        return cls(spec, tuple(weights), tuple(biases), scaler or Scaler.identity(spec.input_width))

    def predict(self, x) -> np.ndarray:
        """ET0 predictions for raw (unscaled) feature rows."""
        xs = self.scaler.transform(np.atleast_2d(x))
        if xs.shape[1] != self.spec.input_width:
            raise ShapeMismatch(f"expected {self.spec.input_width} features, got {xs.shape[1]}")
        out, _ = forward_pass(self.spec, self.weights, self.biases, xs)
        return out[:, 0]

    def same_as(self, other: "TrainedModel") -> bool:
        """Bitwise equality of every stored array and the spec."""
        arrays = lambda m: (*m.weights, *m.biases, m.scaler.mean, m.scaler.std)
        return (
            self.spec == other.spec
            and self.loss_trace == other.loss_trace
            and all(
                a.shape == b.shape and a.tobytes() == b.tobytes()
                for a, b in zip(arrays(self), arrays(other))
            )
        )


class _FlatParams:
    """Weights and biases as views into one contiguous buffer."""

    def __init__(self, weights, biases):
        shapes = [w.shape for w in weights] + [b.shape for b in biases]
        self.size = sum(int(np.prod(s)) for s in shapes)
        self.data = np.empty(self.size)
        self.grad = np.zeros(self.size)
        self.weights = self._views(self.data, [w.shape for w in weights], 0)
        offset = sum(w.size for w in weights)
        self.biases = self._views(self.data, [b.shape for b in biases], offset)
        self.grad_w = self._views(self.grad, [w.shape for w in weights], 0)
        self.grad_b = self._views(self.grad, [b.shape for b in biases], offset)
        for dst, src in zip(self.weights + self.biases, list(weights) + list(biases)):
            dst[...] = src

    @staticmethod
    def _views(buf, shapes, offset):
        views = []
        for shape in shapes:
            n = int(np.prod(shape))
            views.append(buf[offset:offset + n].reshape(shape))
            offset += n
        return views


class SGD:
    def __init__(self, learning_rate: float):
        self.learning_rate = learning_rate

    def step(self, params: np.ndarray, grad: np.ndarray) -> None:
        params -= self.learning_rate * grad


class Adam:
    """Adam with bias-corrected moment estimates (Kingma & Ba, 2015)."""

    def __init__(self, size: int, learning_rate=1e-3, beta1=0.9, beta2=0.999, epsilon=1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.t = 0
        self.m = np.zeros(size)
        self.v = np.zeros(size)

    def step(self, params: np.ndarray, grad: np.ndarray) -> None:
        self.t += 1
        self.m *= self.beta1
        self.m += (1.0 - self.beta1) * grad
        self.v *= self.beta2
        self.v += (1.0 - self.beta2) * (grad * grad)
        m_hat = self.m / (1.0 - self.beta1 ** self.t)
        v_hat = self.v / (1.0 - self.beta2 ** self.t)
        params -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.epsilon)


def make_optimizer(hp: Hyperparams, size: int):
    if hp.optimizer == "sgd":
        return SGD(hp.learning_rate)
    return Adam(size, hp.learning_rate, hp.beta1, hp.beta2, hp.epsilon)


def train(spec: NetworkSpec, train_x, train_y, hp: Hyperparams = Hyperparams()) -> TrainedModel:
    """Fit a network by mini-batch MSE minimisation.

    The feature scaler is fitted on ``train_x`` only.  Initial weights,
    per-epoch shuffling and dropout masks all derive from ``spec.seed``, so
    the result is a deterministic function of (spec, data, hp).  The last
    batch of an epoch may be short.  ``loss_trace`` holds the mean training
    loss of every epoch (with dropout active).
    """
    x = np.asarray(train_x, dtype=np.float64)
    y = np.asarray(train_y, dtype=np.float64).reshape(-1, 1)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyDataset("no training rows")
    if x.shape[0] != y.shape[0]:
        raise ShapeMismatch(f"{x.shape[0]} inputs vs {y.shape[0]} targets")
    if x.shape[1] != spec.input_width:
        raise ShapeMismatch(f"expected {spec.input_width} features, got {x.shape[1]}")
    if x.shape[0] < hp.batch_size:
        raise EmptyDataset(f"{x.shape[0]} rows is fewer than batch size {hp.batch_size}")

    scaler = Scaler.fit(x)
    xs = scaler.transform(x)
    _, shuffle_rng, mask_rng = rng_streams(spec.seed)
    params = _FlatParams(*init_weights(spec))
    optimizer = make_optimizer(hp, params.size)

    trace = []
    # overflow shows up as a non-finite loss, reported as DivergedLoss below
    with np.errstate(over="ignore", invalid="ignore"):
        _run_epochs(spec, hp, xs, y, params, optimizer, shuffle_rng, mask_rng, trace)

    weights = tuple(w.copy() for w in params.weights)
    biases = tuple(b.copy() for b in params.biases)
    return TrainedModel(spec, weights, biases, scaler, tuple(trace))


def _run_epochs(spec, hp, xs, y, params, optimizer, shuffle_rng, mask_rng, trace) -> None:
    n = xs.shape[0]
    for epoch in range(hp.epochs):
        order = shuffle_rng.permutation(n)
        total = 0.0
        for start in range(0, n, hp.batch_size):
            idx = order[start:start + hp.batch_size]
            xb, yb = xs[idx], y[idx]
            out, cache = forward_pass(spec, params.weights, params.biases, xb, True, mask_rng)
            resid = out - yb
            total += float(np.dot(resid[:, 0], resid[:, 0]))
            backward_pass(spec, params.weights, cache, out, yb, params.grad_w, params.grad_b)
            optimizer.step(params.data, params.grad)
        loss = total / n
        if not math.isfinite(loss) or not np.isfinite(params.data).all():
            raise DivergedLoss(epoch, loss)
        trace.append(loss)
