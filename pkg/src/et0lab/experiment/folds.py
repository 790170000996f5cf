from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np


class TooFewRecords(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FoldPlan:
    k: int
    assignments: np.ndarray  # fold index per record

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)

    def sizes(self) -> list[int]:
        return np.bincount(self.assignments, minlength=self.k).tolist()

    def __eq__(self, other):
        return (
            isinstance(other, FoldPlan)
            and self.k == other.k
            and np.array_equal(self.assignments, other.assignments)
        )


def make_folds(
    n: int, k: int = 5, seed: int = 0, mode: Literal["random", "chronological"] = "random"
) -> FoldPlan:
    """Split ``n`` records into ``k`` folds whose sizes differ by at most one.

    ``random`` cuts a seeded permutation into contiguous blocks;
    ``chronological`` cuts the records in their original order.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if n < k:
        raise TooFewRecords(f"{n} records cannot form {k} folds")
    if mode == "random":
        order = np.random.default_rng(seed).permutation(n)
    elif mode == "chronological":
        order = np.arange(n)
    else:
        raise ValueError(f"unknown fold mode {mode!r}")
    assignments = np.empty(n, dtype=np.int64)
    for fold, block in enumerate(np.array_split(order, k)):
        assignments[block] = fold
    return FoldPlan(k, assignments)
