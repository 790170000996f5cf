"""Goodness-of-fit scores for predicted (S) vs observed (O) ET0."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np


class MetricError(ValueError):
    pass


class LengthMismatch(MetricError):
    pass


class EmptyInput(MetricError):
    pass


class ZeroVariance(MetricError):
    pass


@dataclass(frozen=True)
class EvalMetrics:
    rmse: float
    mae_standard: float
    mae_paper_literal: float
    r2: float

    def as_dict(self) -> dict[str, float]:
        return {
            "r2": self.r2,
            "rmse": self.rmse,
            "mae_standard": self.mae_standard,
            "mae_paper_literal": self.mae_paper_literal,
        }


def _pair(pred, obs) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(pred, dtype=np.float64).ravel()
    o = np.asarray(obs, dtype=np.float64).ravel()
    if s.shape != o.shape:
        raise LengthMismatch(f"{s.size} predictions vs {o.size} observations")
    if s.size == 0:
        raise EmptyInput("no values to score")
    return s, o


def rmse(pred, obs) -> float:
    s, o = _pair(pred, obs)
    return float(np.sqrt(np.mean((s - o) ** 2)))


def mae(pred, obs, mode: Literal["standard", "paper_literal"] = "standard") -> float:
    """Mean absolute error.

    ``paper_literal`` is the absolute value of the mean residual, |sum(S - O)/n|,
    which equals the standard MAE only when all residuals share a sign.
    """
    s, o = _pair(pred, obs)
    if mode == "standard":
        return float(np.mean(np.abs(s - o)))
    if mode == "paper_literal":
        return float(abs(np.mean(s - o)))
    raise ValueError(f"unknown MAE mode {mode!r}")


def r2(pred, obs) -> float:
    """Squared Pearson correlation between predictions and observations."""
    s, o = _pair(pred, obs)
    if s.size < 2:
        raise ZeroVariance("need at least two values")
    ds = s - s.mean()
    do = o - o.mean()
    sss = float(np.dot(ds, ds))
    soo = float(np.dot(do, do))
    if sss == 0.0 or soo == 0.0:
        raise ZeroVariance("constant predictions or observations")
    cov = float(np.dot(do, ds))
    return min(cov * cov / (soo * sss), 1.0)


def evaluate(pred, obs) -> EvalMetrics:
    return EvalMetrics(
        rmse=rmse(pred, obs),
        mae_standard=mae(pred, obs, "standard"),
        mae_paper_literal=mae(pred, obs, "paper_literal"),
        r2=r2(pred, obs),
    )


def mean_metrics(items: list[EvalMetrics]) -> EvalMetrics:
    if not items:
        raise EmptyInput("no metrics to average")
    n = len(items)
    return EvalMetrics(
        rmse=sum(m.rmse for m in items) / n,
        mae_standard=sum(m.mae_standard for m in items) / n,
        mae_paper_literal=sum(m.mae_paper_literal for m in items) / n,
        r2=sum(m.r2 for m in items) / n,
    )
