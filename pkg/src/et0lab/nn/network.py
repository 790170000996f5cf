"""
Dense feed-forward regressors: architecture spec, weight initialisation,
inverted dropout, forward pass and backpropagation of the MSE loss.

Layer ``l`` computes ``z = a @ W[l] + b[l]`` with ``W[l]`` of shape
(fan_in, fan_out), so a batch is a row-major (n, features) matrix.  Hidden
layer ``i`` is followed by a dropout layer with ``dropout_rates[i]`` (rate 0
when the tuple is shorter than the hidden stack).  The output layer is a
single linear unit.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .activations import ActivationKind, activate, derivative

INIT_SCHEMES = ("auto", "glorot_uniform", "he_normal", "lecun_normal")

_AUTO_INIT = {
    ActivationKind.SIGMOID: "glorot_uniform",
    ActivationKind.LINEAR: "glorot_uniform",
    ActivationKind.RELU: "he_normal",
    ActivationKind.SELU: "lecun_normal",
}


class ShapeMismatch(ValueError):
    pass


class InvalidRate(ValueError):
    pass


class InvalidSpec(ValueError):
    pass


@dataclass(frozen=True)
class NetworkSpec:
    hidden: tuple[tuple[int, ActivationKind], ...]
    dropout_rates: tuple[float, ...] = ()
    input_width: int = 6
    init: str = "auto"
    seed: int = 0
    output_width: int = field(default=1, init=False)

    def __post_init__(self):
        hidden = tuple((int(w), ActivationKind.parse(k)) for w, k in self.hidden)
        object.__setattr__(self, "hidden", hidden)
        object.__setattr__(self, "dropout_rates", tuple(float(r) for r in self.dropout_rates))
        if self.input_width < 1 or any(w < 1 for w, _ in hidden):
            raise InvalidSpec("layer widths must be >= 1")
        if len(self.dropout_rates) > len(hidden):
            raise InvalidSpec(
                f"{len(self.dropout_rates)} dropout rates for {len(hidden)} hidden layers"
            )
        for rate in self.dropout_rates:
            if not 0.0 <= rate < 1.0:
                raise InvalidRate(f"dropout rate {rate} outside [0, 1)")
        if self.init not in INIT_SCHEMES:
            raise InvalidSpec(f"unknown init scheme {self.init!r}")

    @classmethod
    def build(
        cls,
        widths: Sequence[int],
        activation: "ActivationKind | str",
        dropout_rates: Sequence[float] = (),
        **kwargs,
    ) -> "NetworkSpec":
        """Spec with one activation shared by all hidden layers."""
        kind = ActivationKind.parse(activation)
        return cls(hidden=tuple((w, kind) for w in widths), dropout_rates=tuple(dropout_rates), **kwargs)

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.input_width, *(w for w, _ in self.hidden), self.output_width)

    @property
    def kinds(self) -> tuple[ActivationKind, ...]:
        return (*(k for _, k in self.hidden), ActivationKind.LINEAR)

    @property
    def rates(self) -> tuple[float, ...]:
        """One dropout rate per hidden layer, zero-padded."""
        pad = len(self.hidden) - len(self.dropout_rates)
        return self.dropout_rates + (0.0,) * pad

    @property
    def architecture(self) -> str:
        return "-".join(str(w) for w in self.layer_sizes)

    def with_seed(self, seed: int) -> "NetworkSpec":
        return replace(self, seed=int(seed))

    def to_dict(self) -> dict:
        return {
            "input_width": self.input_width,
            "hidden": [[w, k.value] for w, k in self.hidden],
            "dropout_rates": list(self.dropout_rates),
            "init": self.init,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkSpec":
        return cls(
            hidden=tuple((w, k) for w, k in data["hidden"]),
            dropout_rates=tuple(data.get("dropout_rates", ())),
            input_width=int(data.get("input_width", 6)),
            init=data.get("init", "auto"),
            seed=int(data.get("seed", 0)),
        )


def rng_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator, np.random.Generator]:
    """Independent generators for (initialisation, shuffling, dropout masks)."""
    children = np.random.SeedSequence(int(seed)).spawn(3)
    return tuple(np.random.default_rng(c) for c in children)


def init_weights(spec: NetworkSpec) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Seeded initial weights and zero biases.

    With ``init="auto"`` each layer follows its activation: Glorot-uniform
    for sigmoid and linear, He-normal for ReLU, LeCun-normal for SeLU.
    """
    rng = rng_streams(spec.seed)[0]
    sizes = spec.layer_sizes
    weights, biases = [], []
    for fan_in, fan_out, kind in zip(sizes[:-1], sizes[1:], spec.kinds):
        scheme = _AUTO_INIT[kind] if spec.init == "auto" else spec.init
        if scheme == "glorot_uniform":
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            w = rng.uniform(-limit, limit, size=(fan_in, fan_out))
        elif scheme == "he_normal":
            w = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out))
        else:
            w = rng.normal(0.0, np.sqrt(1.0 / fan_in), size=(fan_in, fan_out))
        weights.append(w)
        biases.append(np.zeros(fan_out))
    return weights, biases


def dropout_mask(shape, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Inverted-dropout multiplier: 0 for dropped units, 1/(1-rate) for kept."""
    keep = rng.random(shape) >= rate
    return keep * (1.0 / (1.0 - rate))


def dropout_apply(values, rate: float, training: bool, mask_seed: int | None = None, rng=None):
    """Inverted dropout.  Identity at inference or when ``rate`` is 0."""
    if not 0.0 <= rate < 1.0:
        raise InvalidRate(f"dropout rate {rate} outside [0, 1)")
    values = np.asarray(values, dtype=np.float64)
    if not training or rate == 0.0:
        return values
    if rng is None:
        rng = np.random.default_rng(mask_seed)
    return values * dropout_mask(values.shape, rate, rng)


@dataclass
class ForwardCache:
    inputs: list[np.ndarray]  # input to each layer (post-dropout)
    pre: list[np.ndarray]     # z per layer
    post: list[np.ndarray]    # activation per layer, before dropout
    masks: list[np.ndarray | None]


def _check_input(spec: NetworkSpec, batch) -> np.ndarray:
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    if x.ndim != 2 or x.shape[1] != spec.input_width:
        raise ShapeMismatch(f"batch shape {x.shape}, expected (n, {spec.input_width})")
    return x


def _check_params(spec: NetworkSpec, weights, biases) -> None:
    sizes = spec.layer_sizes
    if len(weights) != len(sizes) - 1 or len(biases) != len(sizes) - 1:
        raise ShapeMismatch("layer count does not match spec")
    for w, b, fan_in, fan_out in zip(weights, biases, sizes[:-1], sizes[1:]):
        if w.shape != (fan_in, fan_out) or b.shape != (fan_out,):
            raise ShapeMismatch(f"layer weights {w.shape}/{b.shape}, expected ({fan_in}, {fan_out})")


def forward_pass(spec, weights, biases, x, training=False, rng=None):
    """Output (n, 1) and the cache needed by :func:`backward_pass`."""
    cache = ForwardCache([], [], [], [])
    rates = spec.rates
    a = x
    last = len(weights) - 1
    for i, (w, b, kind) in enumerate(zip(weights, biases, spec.kinds)):
        cache.inputs.append(a)
        z = a @ w
        z += b
        h = activate(kind, z) if kind is not ActivationKind.LINEAR else z
        cache.pre.append(z)
        cache.post.append(h)
        mask = None
        if i < last and training and rates[i] > 0.0:
            mask = dropout_mask(h.shape, rates[i], rng)
            a = h * mask
        else:
            a = h
        cache.masks.append(mask)
    return a, cache


def backward_pass(spec, weights, cache: ForwardCache, output, targets, grad_w=None, grad_b=None):
    """Gradients of mean((output - targets)**2) w.r.t. every weight and bias.

    ``grad_w``/``grad_b`` may be preallocated arrays that are filled in place.
    """
    n = output.shape[0]
    if grad_w is None:
        grad_w = [np.empty_like(w) for w in weights]
        grad_b = [np.empty(w.shape[1]) for w in weights]
    delta = (output - targets) * (2.0 / n)
    for i in range(len(weights) - 1, -1, -1):
        if cache.masks[i] is not None:
            delta = delta * cache.masks[i]
        kind = spec.kinds[i]
        if kind is not ActivationKind.LINEAR:
            delta = delta * derivative(kind, cache.pre[i], cache.post[i])
        np.matmul(cache.inputs[i].T, delta, out=grad_w[i])
        np.sum(delta, axis=0, out=grad_b[i])
        if i > 0:
            delta = delta @ weights[i].T
    return grad_w, grad_b


def forward(model, batch, training: bool = False, mask_seed: int = 0) -> np.ndarray:
    """Network output for an already scaled batch, shape (n, 1).

    ``model`` is anything with ``spec``, ``weights`` and ``biases``
    (normally a :class:`~et0lab.nn.training.TrainedModel`).  ``mask_seed``
    only matters when ``training`` is true.
    """
    x = _check_input(model.spec, batch)
    _check_params(model.spec, model.weights, model.biases)
    rng = np.random.default_rng(mask_seed) if training else None
    out, _ = forward_pass(model.spec, model.weights, model.biases, x, training, rng)
    return out


def backward(model, batch, targets, training: bool = False, mask_seed: int = 0):
    """MSE-loss gradients as ``(weight_grads, bias_grads)`` lists."""
    x = _check_input(model.spec, batch)
    _check_params(model.spec, model.weights, model.biases)
    y = np.asarray(targets, dtype=np.float64).reshape(-1, 1)
    if y.shape[0] != x.shape[0]:
        raise ShapeMismatch(f"{x.shape[0]} inputs vs {y.shape[0]} targets")
    rng = np.random.default_rng(mask_seed) if training else None
    out, cache = forward_pass(model.spec, model.weights, model.biases, x, training, rng)
    return backward_pass(model.spec, model.weights, cache, out, y)


def mse_loss(model, batch, targets, training: bool = False, mask_seed: int = 0) -> float:
    out = forward(model, batch, training, mask_seed)
    y = np.asarray(targets, dtype=np.float64).reshape(-1, 1)
    return float(np.mean((out - y) ** 2))
