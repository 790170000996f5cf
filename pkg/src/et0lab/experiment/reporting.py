"""Result files, rankings and scatter data.

Files written to a run directory:

``folds.csv``       entry_id,station,fold,r2,rmse,mae_standard,mae_paper_literal,seconds
``means.csv``       entry_id,model_name,family,station,folds_ok,r2,rmse,mae_standard,mae_paper_literal,seconds
``errors.csv``      entry_id,station,fold,error
``predictions.csv`` station,entry_id,fold,index,observed_et0,predicted_et0  (only when kept)

Floats use ``repr`` so files are exact and reproducible.  The ``seconds``
columns stay empty unless timing is requested, because wall time is the one
non-deterministic quantity of a run.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .cv import ExperimentResult
from .grid import FAMILIES, L_ANN

FOLD_COLUMNS = ("entry_id", "station", "fold", "r2", "rmse", "mae_standard", "mae_paper_literal", "seconds")
MEAN_COLUMNS = (
    "entry_id", "model_name", "family", "station", "folds_ok",
    "r2", "rmse", "mae_standard", "mae_paper_literal", "seconds",
)
ERROR_COLUMNS = ("entry_id", "station", "fold", "error")
PREDICTION_COLUMNS = ("station", "entry_id", "fold", "index", "observed_et0", "predicted_et0")
SCATTER_COLUMNS = ("station", "model", "observed_et0", "predicted_et0")
RANK_BY = ("r2", "rmse", "mae")


class MissingPredictions(FileNotFoundError):
    pass


def _num(x: float) -> str:
    return repr(float(x))


@dataclass(frozen=True)
class MeanRow:
    entry_id: str
    model_name: str
    family: str
    station: str
    folds_ok: int
    r2: float
    rmse: float
    mae_standard: float
    mae_paper_literal: float

    @classmethod
    def from_result(cls, result: ExperimentResult) -> "MeanRow | None":
        if result.mean is None:
            return None
        m = result.mean
        return cls(result.entry_id, result.name, result.family, result.station,
                   len(result.fold_metrics), m.r2, m.rmse, m.mae_standard, m.mae_paper_literal)


@dataclass(frozen=True)
class RankedRow:
    order: int
    model_name: str
    station: str
    r2: float
    rmse: float
    mae: float
    entry_id: str = ""


def _csv_text(header: Sequence[str], rows: Iterable[Sequence], delimiter: str = ",") -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n", delimiter=delimiter)
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def fold_rows(results: Sequence[ExperimentResult], record_timing: bool = False):
    for r in results:
        for f in r.folds:
            seconds = _num(f.seconds) if record_timing else ""
            if f.metrics is None:
                yield [r.entry_id, r.station, f.fold, "", "", "", "", seconds]
            else:
                m = f.metrics
                yield [r.entry_id, r.station, f.fold, _num(m.r2), _num(m.rmse),
                       _num(m.mae_standard), _num(m.mae_paper_literal), seconds]


def mean_rows(results: Sequence[ExperimentResult], record_timing: bool = False):
    for r in results:
        seconds = _num(r.wall_time) if record_timing else ""
        if r.mean is None:
            yield [r.entry_id, r.name, r.family, r.station, 0, "", "", "", "", seconds]
        else:
            m = r.mean
            yield [r.entry_id, r.name, r.family, r.station, len(r.fold_metrics), _num(m.r2),
                   _num(m.rmse), _num(m.mae_standard), _num(m.mae_paper_literal), seconds]


def write_results(
    results: Sequence[ExperimentResult], out_dir: str | Path, record_timing: bool = False
) -> dict[str, Path]:
    """Write the run's CSV files; returns their paths keyed by short name."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "folds": out / "folds.csv",
        "means": out / "means.csv",
        "errors": out / "errors.csv",
    }
    paths["folds"].write_text(_csv_text(FOLD_COLUMNS, fold_rows(results, record_timing)), encoding="utf-8")
    paths["means"].write_text(_csv_text(MEAN_COLUMNS, mean_rows(results, record_timing)), encoding="utf-8")
    errors = [[r.entry_id, r.station, f.fold, f.error] for r in results for f in r.folds if f.error]
    paths["errors"].write_text(_csv_text(ERROR_COLUMNS, errors), encoding="utf-8")
    if any(f.predicted is not None for r in results for f in r.folds):
        paths["predictions"] = out / "predictions.csv"
        paths["predictions"].write_text(_csv_text(PREDICTION_COLUMNS, prediction_rows(results)), encoding="utf-8")
    return paths


def prediction_rows(results: Sequence[ExperimentResult]):
    for r in results:
        for f in r.folds:
            if f.predicted is None:
                continue
            for idx, obs, pred in zip(f.test_index, f.observed, f.predicted):
                yield [r.station, r.entry_id, f.fold, int(idx), _num(obs), _num(pred)]


def read_means(path: str | Path) -> list[MeanRow]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            if not rec["r2"]:
                continue
            rows.append(MeanRow(
                rec["entry_id"], rec["model_name"], rec["family"], rec["station"], int(rec["folds_ok"]),
                float(rec["r2"]), float(rec["rmse"]), float(rec["mae_standard"]), float(rec["mae_paper_literal"]),
            ))
    return rows


def rank_results(
    results: Sequence[ExperimentResult | MeanRow], by: str = "r2", top_n: int | None = 20
) -> list[RankedRow]:
    """Order results best-first.

    ``r2`` sorts descending, ``rmse`` and ``mae`` ascending.  Ties fall back
    to ascending RMSE, then entry id, then station.  Results whose folds all
    failed are left out.
    """
    if by not in RANK_BY:
        raise ValueError(f"cannot rank by {by!r}; choose from {RANK_BY}")
    rows = [MeanRow.from_result(r) if isinstance(r, ExperimentResult) else r for r in results]
    rows = [r for r in rows if r is not None]
    primary = {
        "r2": lambda r: -r.r2,
        "rmse": lambda r: r.rmse,
        "mae": lambda r: r.mae_standard,
    }[by]
    rows.sort(key=lambda r: (primary(r), r.rmse, r.entry_id, r.station))
    if top_n is not None:
        rows = rows[:top_n]
    return [
        RankedRow(i, r.model_name, r.station, r.r2, r.rmse, r.mae_standard, r.entry_id)
        for i, r in enumerate(rows, 1)
    ]


def format_ranking(rows: Sequence[RankedRow]) -> str:
    header = ("Order", "model name", "station name", "R2", "RMSE", "MAE")
    body = [(f"{r.order:02d}", r.model_name, r.station, f"{r.r2:.4f}", f"{r.rmse:.4f}", f"{r.mae:.4f}") for r in rows]
    widths = [max(len(str(c)) for c in col) for col in zip(header, *body)]
    lines = ["  ".join(str(c).ljust(w) for c, w in zip(line, widths)).rstrip() for line in (header, *body)]
    return "\n".join(lines)


def ranking_csv(rows: Sequence[RankedRow]) -> str:
    return _csv_text(
        ("order", "model_name", "station", "r2", "rmse", "mae"),
        ([r.order, r.model_name, r.station, _num(r.r2), _num(r.rmse), _num(r.mae)] for r in rows),
    )


def best_by_family(results: Sequence[ExperimentResult | MeanRow]) -> dict[str, dict[str, float]]:
    """Best mean R2 per family, per station."""
    rows = [MeanRow.from_result(r) if isinstance(r, ExperimentResult) else r for r in results]
    best: dict[str, dict[str, float]] = {}
    for r in rows:
        if r is None:
            continue
        by_station = best.setdefault(r.family, {})
        by_station[r.station] = max(by_station.get(r.station, -np.inf), r.r2)
    return best


def format_family_table(results: Sequence[ExperimentResult | MeanRow]) -> str:
    """Best R2 per family and station, plus the best-DNN minus best-ANN margin."""
    best = best_by_family(results)
    stations = sorted({s for per in best.values() for s in per})
    families = [f for f in FAMILIES if f in best]
    header = ["family", *stations]
    lines = [header]
    for fam in families:
        lines.append([fam, *(f"{best[fam][s]:.4f}" if s in best[fam] else "-" for s in stations)])
    dnn = [f for f in families if f != L_ANN]
    if L_ANN in best and dnn:
        margins = []
        for s in stations:
            ann = best[L_ANN].get(s)
            top = max((best[f][s] for f in dnn if s in best[f]), default=None)
            margins.append(f"{top - ann:+.4f}" if ann is not None and top is not None else "-")
        lines.append(["DNN - ANN", *margins])
    widths = [max(len(row[i]) for row in lines) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in lines)


def scatter_tsv(predictions_path: str | Path, models: Sequence[str] | None = None) -> str:
    """Observed vs predicted pairs for plotting against the 1:1 line."""
    path = Path(predictions_path)
    if not path.exists():
        raise MissingPredictions(f"{path} not found; rerun with --save-predictions")
    wanted = set(models) if models else None
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            if wanted is not None and rec["entry_id"] not in wanted:
                continue
            rows.append([rec["station"], rec["entry_id"], rec["observed_et0"], rec["predicted_et0"]])
    return _csv_text(SCATTER_COLUMNS, rows, delimiter="\t")
