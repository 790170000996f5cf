from .cv import Dataset, ExperimentResult, FoldOutcome, aggregate, derive_seed, run_cv, run_fold
from .folds import FoldPlan, TooFewRecords, make_folds
from .grid import (
    FAMILIES,
    GridConfig,
    InvalidGridConfig,
    ModelGridEntry,
    build_model_grid,
    find_entry,
)
from .reporting import (
    MeanRow,
    MissingPredictions,
    RankedRow,
    format_family_table,
    format_ranking,
    rank_results,
    read_means,
    scatter_tsv,
    write_results,
)
from .runner import count_runs, run_grid

__all__ = [
    "FAMILIES",
    "Dataset",
    "ExperimentResult",
    "FoldOutcome",
    "FoldPlan",
    "GridConfig",
    "InvalidGridConfig",
    "MeanRow",
    "MissingPredictions",
    "ModelGridEntry",
    "RankedRow",
    "TooFewRecords",
    "aggregate",
    "build_model_grid",
    "count_runs",
    "derive_seed",
    "find_entry",
    "format_family_table",
    "format_ranking",
    "make_folds",
    "rank_results",
    "read_means",
    "run_cv",
    "run_fold",
    "run_grid",
    "scatter_tsv",
    "write_results",
]
