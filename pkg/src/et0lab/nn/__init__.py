from .activations import SELU_ALPHA, SELU_LAMBDA, ActivationKind, activate, derivative
from .network import (
    InvalidRate,
    InvalidSpec,
    NetworkSpec,
    ShapeMismatch,
    backward,
    dropout_apply,
    forward,
    init_weights,
    mse_loss,
)
from .serialization import load_model, save_model
from .training import (
    DivergedLoss,
    EmptyDataset,
    Hyperparams,
    Scaler,
    TrainedModel,
    TrainingError,
    train,
)

__all__ = [
    "SELU_ALPHA",
    "SELU_LAMBDA",
    "ActivationKind",
    "DivergedLoss",
    "EmptyDataset",
    "Hyperparams",
    "InvalidRate",
    "InvalidSpec",
    "NetworkSpec",
    "Scaler",
    "ShapeMismatch",
    "TrainedModel",
    "TrainingError",
    "activate",
    "backward",
    "derivative",
    "dropout_apply",
    "forward",
    "init_weights",
    "load_model",
    "mse_loss",
    "save_model",
    "train",
]
