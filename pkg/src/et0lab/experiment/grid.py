"""
The model grid: single-hidden-layer ANNs of width 1..30 (sigmoid hidden,
linear output) plus three deep networks, each crossed with a dropout-rate
grid over its three hidden layers.  The default grid has 30 + 3 * 6**3 = 678
entries.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable

from ..nn import ActivationKind, Hyperparams, NetworkSpec

L_ANN = "L-ANN"
L_DNN_SAGGI = "L-DNN-Saggi"
P_DNN_RELU = "P-DNN-ReLU"
P_DNN_SELU = "P-DNN-SeLU"
FAMILIES = (L_ANN, L_DNN_SAGGI, P_DNN_RELU, P_DNN_SELU)

DNN_BASES = {
    L_DNN_SAGGI: ((40, 60, 40), ActivationKind.RELU, "Saggi & Jain 2019, 7-40-60-40-1 ReLU"),
    P_DNN_RELU: ((60, 90, 60), ActivationKind.RELU, "proposed 60-90-60 ReLU"),
    P_DNN_SELU: ((60, 90, 60), ActivationKind.SELU, "proposed 60-90-60 SeLU"),
}

# Huo et al. 2012 multi-hidden variants, opt-in
HUO_HIDDEN = ((8,), (4, 5), (5, 6))

DEFAULT_RATES = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)


class InvalidGridConfig(ValueError):
    pass


@dataclass(frozen=True)
class ModelGridEntry:
    id: str
    family: str
    spec: NetworkSpec
    provenance: str
    name: str  # display name used in ranking tables


@dataclass(frozen=True)
class GridConfig:
    families: tuple[str, ...] = FAMILIES
    ann_width_range: tuple[int, int] = (1, 30)
    dnn_dropout_rates: tuple[float, ...] = DEFAULT_RATES
    dropout_grid: bool = True
    include_huo: bool = False
    hyperparams: Hyperparams = field(default_factory=Hyperparams)
    seed: int = 0
    folds: int = 5

    def __post_init__(self):
        unknown = [f for f in self.families if f not in FAMILIES]
        if unknown:
            raise InvalidGridConfig(f"unknown families {unknown}; choose from {FAMILIES}")
        lo, hi = self.ann_width_range
        if lo < 1 or hi < lo:
            raise InvalidGridConfig(f"bad ann_width_range {self.ann_width_range}")
        if not self.dnn_dropout_rates:
            raise InvalidGridConfig("dnn_dropout_rates is empty")
        if any(not 0.0 <= r < 1.0 for r in self.dnn_dropout_rates):
            raise InvalidGridConfig(f"dropout rates must lie in [0, 1): {self.dnn_dropout_rates}")
        if len(set(self.dnn_dropout_rates)) != len(self.dnn_dropout_rates):
            raise InvalidGridConfig("duplicate dropout rates")
        if self.folds < 2:
            raise InvalidGridConfig("folds must be >= 2")

    def to_dict(self) -> dict:
        return {
            "families": list(self.families),
            "ann_width_range": list(self.ann_width_range),
            "dnn_dropout_rates": list(self.dnn_dropout_rates),
            "dropout_grid": self.dropout_grid,
            "include_huo": self.include_huo,
            "hyperparams": self.hyperparams.to_dict(),
            "seed": self.seed,
            "folds": self.folds,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GridConfig":
        known = set(cls().to_dict())
        extra = set(data) - known
        if extra:
            raise InvalidGridConfig(f"unknown grid config keys {sorted(extra)}")
        kwargs = dict(data)
        try:
            if "families" in kwargs:
                kwargs["families"] = tuple(kwargs["families"])
            if "ann_width_range" in kwargs:
                kwargs["ann_width_range"] = tuple(int(v) for v in kwargs["ann_width_range"])
            if "dnn_dropout_rates" in kwargs:
                kwargs["dnn_dropout_rates"] = tuple(float(v) for v in kwargs["dnn_dropout_rates"])
            if "hyperparams" in kwargs:
                kwargs["hyperparams"] = Hyperparams.from_dict(kwargs["hyperparams"])
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InvalidGridConfig):
                raise
            raise InvalidGridConfig(str(exc)) from None
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | Path) -> "GridConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def with_overrides(self, **changes) -> "GridConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def _rate_label(rates: Iterable[float]) -> str:
    return " ".join(f"{r:g}" for r in rates)


def ann_entries(config: GridConfig) -> list[ModelGridEntry]:
    lo, hi = config.ann_width_range
    entries = [
        ModelGridEntry(
            id=f"{L_ANN}-{w}",
            family=L_ANN,
            spec=NetworkSpec.build([w], ActivationKind.SIGMOID),
            provenance="single-hidden-layer sigmoid ANN literature, width sweep",
            name=f"{L_ANN} ({w})",
        )
        for w in range(lo, hi + 1)
    ]
    if config.include_huo:
        for hidden in HUO_HIDDEN:
            entries.append(
                ModelGridEntry(
                    id=f"{L_ANN}-Huo-" + "-".join(map(str, hidden)),
                    family=L_ANN,
                    spec=NetworkSpec.build(hidden, ActivationKind.SIGMOID),
                    provenance="Huo et al. 2012",
                    name=f"{L_ANN} ({', '.join(map(str, hidden))})",
                )
            )
    return entries


def dnn_entries(family: str, config: GridConfig) -> list[ModelGridEntry]:
    widths, kind, provenance = DNN_BASES[family]
    rates = config.dnn_dropout_rates if config.dropout_grid else (0.0,)
    entries = []
    for combo in itertools.product(rates, repeat=len(widths)):
        plain = all(r == 0.0 for r in combo)
        entries.append(
            ModelGridEntry(
                id=family if plain else f"{family}-dropout-" + "-".join(f"{r:g}" for r in combo),
                family=family,
                spec=NetworkSpec.build(widths, kind, combo),
                provenance=provenance,
                name=family if plain else f"{family} dropout {_rate_label(combo)}",
            )
        )
    return entries


def build_model_grid(config: GridConfig = GridConfig()) -> list[ModelGridEntry]:
    entries: list[ModelGridEntry] = []
    for family in FAMILIES:
        if family not in config.families:
            continue
        entries.extend(ann_entries(config) if family == L_ANN else dnn_entries(family, config))
    ids = [e.id for e in entries]
    if len(set(ids)) != len(ids):
        raise InvalidGridConfig("grid produced duplicate entry ids")
    return entries


def find_entry(entry_id: str, config: GridConfig | None = None) -> ModelGridEntry:
    """Look up an entry of the full (dropout-grid, Huo-inclusive) grid by id."""
    config = config or GridConfig(include_huo=True)
    for entry in build_model_grid(config):
        if entry.id == entry_id:
            return entry
    raise KeyError(f"no grid entry {entry_id!r}")
