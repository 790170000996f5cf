"""Cross-validated training and scoring of one grid entry."""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from ..metrics import EvalMetrics, MetricError, evaluate, mean_metrics
from ..nn import DivergedLoss, Hyperparams, NetworkSpec, TrainingError, train
from ..nn.network import ShapeMismatch
from .folds import FoldPlan
from .grid import ModelGridEntry

Trainer = Callable[[NetworkSpec, np.ndarray, np.ndarray, Hyperparams], object]


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from arbitrary parts (independent of PYTHONHASHSEED)."""
    digest = hashlib.sha256("\x1f".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass(frozen=True, eq=False)
class Dataset:
    station: str
    x: np.ndarray  # (n, 6) raw features
    y: np.ndarray  # (n,) reference ET0

    def __post_init__(self):
        if self.x.ndim != 2 or self.x.shape[0] != self.y.shape[0]:
            raise ShapeMismatch(f"features {self.x.shape} vs targets {self.y.shape}")
        if self.x.shape[0] == 0:
            raise ValueError(f"dataset {self.station!r} is empty")


@dataclass(frozen=True, eq=False)
class FoldOutcome:
    fold: int
    metrics: EvalMetrics | None
    seconds: float
    error: str | None = None
    test_index: np.ndarray | None = None
    predicted: np.ndarray | None = None
    observed: np.ndarray | None = None
    diverged: bool = False

    @property
    def ok(self) -> bool:
        return self.metrics is not None


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    entry_id: str
    name: str
    family: str
    station: str
    folds: tuple[FoldOutcome, ...]
    mean: EvalMetrics | None
    wall_time: float

    @property
    def fold_metrics(self) -> list[EvalMetrics]:
        return [f.metrics for f in self.folds if f.metrics is not None]


def fold_seed(base_seed: int, station: str, entry_id: str, fold: int) -> int:
    return derive_seed(base_seed, station, entry_id, fold)


def plan_seed(base_seed: int, station: str) -> int:
    return derive_seed(base_seed, station, "folds")


def run_fold(
    entry: ModelGridEntry,
    dataset: Dataset,
    plan: FoldPlan,
    fold: int,
    hp: Hyperparams,
    seed: int,
    trainer: Trainer = train,
    keep_predictions: bool = False,
) -> FoldOutcome:
    """Train on every fold but ``fold`` and score on ``fold``.

    Training and scoring failures are captured in the outcome rather than
    raised, so one bad fold never aborts the others.
    """
    train_idx = plan.train_indices(fold)
    test_idx = plan.test_indices(fold)
    spec = entry.spec.with_seed(fold_seed(seed, dataset.station, entry.id, fold))
    started = time.perf_counter()
    try:
        model = trainer(spec, dataset.x[train_idx], dataset.y[train_idx], hp)
        predicted = np.asarray(model.predict(dataset.x[test_idx]), dtype=np.float64)
        metrics = evaluate(predicted, dataset.y[test_idx])
    except (TrainingError, MetricError, ShapeMismatch, FloatingPointError) as exc:
        return FoldOutcome(
            fold,
            None,
            time.perf_counter() - started,
            error=f"{type(exc).__name__}: {exc}",
            diverged=isinstance(exc, DivergedLoss),
        )
    seconds = time.perf_counter() - started
    if not keep_predictions:
        return FoldOutcome(fold, metrics, seconds)
    return FoldOutcome(fold, metrics, seconds, None, test_idx, predicted, dataset.y[test_idx])


def aggregate(entry: ModelGridEntry, station: str, outcomes: Iterable[FoldOutcome]) -> ExperimentResult:
    """Combine fold outcomes; the mean is taken in fold order, whatever the input order."""
    folds = tuple(sorted(outcomes, key=lambda o: o.fold))
    good = [f.metrics for f in folds if f.metrics is not None]
    return ExperimentResult(
        entry_id=entry.id,
        name=entry.name,
        family=entry.family,
        station=station,
        folds=folds,
        mean=mean_metrics(good) if good else None,
        wall_time=sum(f.seconds for f in folds),
    )


def run_cv(
    entry: ModelGridEntry,
    dataset: Dataset,
    plan: FoldPlan,
    hp: Hyperparams = Hyperparams(),
    seed: int = 0,
    trainer: Trainer = train,
    keep_predictions: bool = False,
    fold_order: Sequence[int] | None = None,
) -> ExperimentResult:
    """k-fold cross-validation of one grid entry on one station's data."""
    if plan.assignments.shape[0] != dataset.x.shape[0]:
        raise ValueError(
            f"fold plan covers {plan.assignments.shape[0]} records, dataset has {dataset.x.shape[0]}"
        )
    order = list(fold_order) if fold_order is not None else list(range(plan.k))
    if sorted(order) != list(range(plan.k)):
        raise ValueError(f"fold_order {order} is not a permutation of 0..{plan.k - 1}")
    outcomes = [
        run_fold(entry, dataset, plan, f, hp, seed, trainer, keep_predictions) for f in order
    ]
    return aggregate(entry, dataset.station, outcomes)
