"""Element-wise transfer functions and their derivatives."""

from __future__ import annotations

from enum import Enum

import numpy as np

# Klambauer et al. (2017), as quoted to eight decimals
SELU_ALPHA = 1.67326324
SELU_LAMBDA = 1.05070098


class ActivationKind(str, Enum):
    SIGMOID = "sigmoid"
    RELU = "relu"
    SELU = "selu"
    LINEAR = "linear"

    @classmethod
    def parse(cls, value: "str | ActivationKind") -> "ActivationKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown activation {value!r}") from None


def _sigmoid(x):
    # split by sign so exp never overflows
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def activate(kind: ActivationKind, x):
    """Apply ``kind`` to a scalar or array; scalars come back as floats."""
    kind = ActivationKind.parse(kind)
    arr = np.asarray(x, dtype=np.float64)
    if kind is ActivationKind.SIGMOID:
        out = _sigmoid(arr)
    elif kind is ActivationKind.RELU:
        out = np.maximum(arr, 0.0)
    elif kind is ActivationKind.SELU:
        out = SELU_LAMBDA * np.where(arr > 0, arr, SELU_ALPHA * np.expm1(np.minimum(arr, 0.0)))
    else:
        out = arr.copy()
    return float(out) if np.ndim(x) == 0 else out


def derivative(kind: ActivationKind, z, h=None):
    """d activation / dz at pre-activation ``z``.

    ``h`` is the already computed activation ``activate(kind, z)``; passing
    it saves an exponential for sigmoid and SeLU.  At exactly z = 0 ReLU and
    SeLU take their left branch (0 and lambda*alpha).
    """
    kind = ActivationKind.parse(kind)
    z = np.asarray(z, dtype=np.float64)
    if kind is ActivationKind.LINEAR:
        return np.ones_like(z)
    if h is None:
        h = activate(kind, z)
    if kind is ActivationKind.SIGMOID:
        return h * (1.0 - h)
    if kind is ActivationKind.RELU:
        return (z > 0).astype(np.float64)
    # SeLU left branch: lambda*alpha*e^z == h + lambda*alpha
    return np.where(z > 0, SELU_LAMBDA, h + SELU_LAMBDA * SELU_ALPHA)
