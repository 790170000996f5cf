"""JSON model files.

Layout::

    {"format": "et0lab-model/1",
     "spec": {...NetworkSpec.to_dict()...},
     "scaler": {"mean": [...], "std": [...]},
     "layers": [{"shape": [fan_in, fan_out], "weights": [row-major], "biases": [...]}, ...],
     "loss_trace": [...]}

Floats are written with ``repr`` precision, which makes load(save(m)) bit-exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .network import NetworkSpec
from .training import Scaler, TrainedModel

FORMAT = "et0lab-model/1"


def model_to_dict(model: TrainedModel) -> dict:
    return {
        "format": FORMAT,
        "spec": model.spec.to_dict(),
        "scaler": {"mean": model.scaler.mean.tolist(), "std": model.scaler.std.tolist()},
        "layers": [
            {"shape": list(w.shape), "weights": w.ravel(order="C").tolist(), "biases": b.tolist()}
            for w, b in zip(model.weights, model.biases)
        ],
        "loss_trace": list(model.loss_trace),
    }


def model_from_dict(data: dict) -> TrainedModel:
    if data.get("format") != FORMAT:
        raise ValueError(f"unsupported model format {data.get('format')!r}")
    spec = NetworkSpec.from_dict(data["spec"])
    weights = tuple(
        np.array(layer["weights"], dtype=np.float64).reshape(layer["shape"]) for layer in data["layers"]
    )
    biases = tuple(np.array(layer["biases"], dtype=np.float64) for layer in data["layers"])
    scaler = Scaler(
        np.array(data["scaler"]["mean"], dtype=np.float64),
        np.array(data["scaler"]["std"], dtype=np.float64),
    )
    return TrainedModel(spec, weights, biases, scaler, tuple(float(v) for v in data.get("loss_trace", [])))


def save_model(model: TrainedModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model)), encoding="utf-8")


def load_model(path: str | Path) -> TrainedModel:
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
