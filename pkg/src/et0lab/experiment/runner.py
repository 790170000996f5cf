"""Execute (entry, station, fold) tasks, optionally in a process pool.

Each task derives its own seed from (seed, station, entry id, fold) and the
fold plans are fixed per station before any task starts, so results do not
depend on the worker count or on completion order.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence

from ..nn import Hyperparams
from .cv import Dataset, ExperimentResult, FoldOutcome, aggregate, plan_seed, run_fold
from .folds import FoldPlan, make_folds
from .grid import ModelGridEntry

logger = logging.getLogger(__name__)

_WORKER: dict = {}


def count_runs(n_entries: int, n_stations: int, k: int) -> int:
    return n_entries * n_stations * k


def fold_plans(datasets: Sequence[Dataset], k: int, seed: int, mode: str = "random") -> dict[str, FoldPlan]:
    return {ds.station: make_folds(ds.x.shape[0], k, plan_seed(seed, ds.station), mode) for ds in datasets}


def _init_worker(entries, datasets, plans, hp, seed, keep_predictions):
    _WORKER.update(
        entries=entries, datasets=datasets, plans=plans, hp=hp, seed=seed, keep=keep_predictions
    )


def _run_task(task: tuple[int, int, int]) -> tuple[tuple[int, int, int], FoldOutcome]:
    ei, si, fold = task
    w = _WORKER
    ds = w["datasets"][si]
    outcome = run_fold(w["entries"][ei], ds, w["plans"][ds.station], fold, w["hp"], w["seed"], keep_predictions=w["keep"])
    return task, outcome


def run_grid(
    entries: Sequence[ModelGridEntry],
    datasets: Sequence[Dataset],
    k: int = 5,
    seed: int = 0,
    hp: Hyperparams = Hyperparams(),
    jobs: int = 1,
    keep_predictions: bool = False,
    fold_mode: str = "random",
    progress: Callable[[int, int], None] | None = None,
) -> list[ExperimentResult]:
    """Cross-validate every entry on every dataset.

    Results come back ordered by station (input order), then entry (grid order).
    """
    entries = list(entries)
    datasets = list(datasets)
    if len({ds.station for ds in datasets}) != len(datasets):
        raise ValueError("station names must be unique")
    plans = fold_plans(datasets, k, seed, fold_mode)
    tasks = [(ei, si, f) for si in range(len(datasets)) for ei in range(len(entries)) for f in range(k)]
    collected: dict[tuple[int, int], list[FoldOutcome]] = defaultdict(list)
    args = (entries, datasets, plans, hp, seed, keep_predictions)

    def record(done: int, task, outcome):
        collected[task[:2]].append(outcome)
        if outcome.error:
            logger.warning("%s / %s fold %d failed: %s", entries[task[0]].id, datasets[task[1]].station, task[2], outcome.error)
        if progress:
            progress(done, len(tasks))

    if jobs <= 1:
        _init_worker(*args)
        try:
            for i, task in enumerate(tasks, 1):
                record(i, *_run_task(task))
        finally:
            _WORKER.clear()
    else:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=args) as pool:
            for i, (task, outcome) in enumerate(pool.map(_run_task, tasks, chunksize=1), 1):
                record(i, task, outcome)

    return [
        aggregate(entries[ei], datasets[si].station, collected[(ei, si)])
        for si in range(len(datasets))
        for ei in range(len(entries))
    ]
