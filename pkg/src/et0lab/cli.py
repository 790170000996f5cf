"""Command-line entry point: ``et0 <command> [options]``.

Exit codes: 0 ok, 2 usage or schema error, 3 data invariant violation,
4 training failed on every fold.
"""

from __future__ import annotations

import argparse
import datetime as dt
import hashlib
import json
import logging
import os
import sys
from dataclasses import asdict, replace
from pathlib import Path
from typing import Sequence

from . import __version__
from .experiment import (
    Dataset,
    GridConfig,
    InvalidGridConfig,
    MissingPredictions,
    build_model_grid,
    count_runs,
    derive_seed,
    find_entry,
    format_family_table,
    format_ranking,
    rank_results,
    read_means,
    run_grid,
    scatter_tsv,
    write_results,
)
from .experiment.grid import FAMILIES
from .experiment.reporting import ranking_csv
from .meteo_data import (
    HardInvariantViolation,
    InvalidStation,
    MeteoDataError,
    dump_station,
    feature_matrix,
    load_station,
    parse_csv,
    synthesize_dataset,
    write_csv,
)
from .nn import ActivationKind, Hyperparams, NetworkSpec, TrainingError, save_model, train
from .pm_oracle import PMError, PMOptions, et0_series
from .stations import PROFILES, STATIONS, lookup

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_TRAINING = 4

log = logging.getLogger("et0lab")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()


def write_manifest(path: Path, argv: Sequence[str], config: dict, seeds: dict,
                   inputs: Sequence[Path], outputs: dict[str, Path]) -> None:
    """Record how a set of output files was produced."""
    manifest = {
        "tool": "et0lab",
        "version": __version__,
        "command": list(argv),
        "config": config,
        "config_digest": _digest(config),
        "seeds": seeds,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": {name: {"path": p.name, "sha256": _sha256(p)} for name, p in outputs.items()},
        "timestamp": dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds"),
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _pm_options(args) -> PMOptions:
    return PMOptions(gamma_mode=args.gamma, g=args.g, albedo=args.albedo, radiation=args.radiation)


def _read_records(path: Path, strict: bool):
    try:
        return parse_csv(path, strict=strict)
    except HardInvariantViolation as exc:
        raise CliError(f"{path}: {exc}", EXIT_DATA) from None
    except MeteoDataError as exc:
        raise CliError(f"{path}: {exc}", EXIT_USAGE) from None
    except OSError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None


def _read_station(path: Path):
    try:
        return load_station(path)
    except (InvalidStation, OSError) as exc:
        raise CliError(f"{path}: {exc}", EXIT_USAGE) from None


def _labelled_dataset(data: Path, station_cfg: Path, options: PMOptions, strict: bool) -> Dataset:
    records, flags = _read_records(data, strict)
    station = _read_station(station_cfg)
    for flag in flags:
        log.info("%s row %d: %s %s", data.name, flag.row, flag.code, flag.detail)
    if not records:
        raise CliError(f"{data}: no valid records", EXIT_DATA)
    try:
        y = et0_series(records, station, options)
    except PMError as exc:
        raise CliError(f"{data}: {exc}", EXIT_DATA) from None
    return Dataset(station.name, feature_matrix(records), y)


def _synthetic_dataset(key: str, days: int, seed: int, options: PMOptions) -> Dataset:
    records = synthesize_dataset(PROFILES[key], days, derive_seed(seed, key, "synth"))
    station = STATIONS[key]
    return Dataset(station.name, feature_matrix(records), et0_series(records, station, options))


def _hyperparams(args, base: Hyperparams = Hyperparams()) -> Hyperparams:
    changes = {
        "epochs": args.epochs,
        "batch_size": args.batch_size,
        "learning_rate": args.learning_rate,
        "optimizer": args.optimizer,
    }
    try:
        return replace(base, **{k: v for k, v in changes.items() if v is not None})
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip())


def _station_keys(names: Sequence[str]) -> list[str]:
    keys = []
    for name in names:
        for part in name.split(","):
            if part.strip().lower() == "all":
                keys.extend(STATIONS)
            elif part.strip():
                try:
                    keys.append(lookup(part))
                except KeyError as exc:
                    raise CliError(str(exc.args[0]), EXIT_USAGE) from None
    return list(dict.fromkeys(keys))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_compute(args, argv) -> int:
    records, flags = _read_records(args.input, args.strict)
    station = _read_station(args.station)
    options = _pm_options(args)
    rows = ["date,et0_mm_day"]
    try:
        for rec, value in zip(records, et0_series(records, station, options)):
            rows.append(f"{rec.date.isoformat()},{float(value)!r}")
    except PMError as exc:
        raise CliError(str(exc), EXIT_DATA) from None
    out = Path(args.output)
    out.write_text("\n".join(rows) + "\n", encoding="utf-8")
    flags_path = out.with_name(out.name + ".flags.csv")
    flags_path.write_text(
        "row,code,detail\n" + "".join(f'{f.row},{f.code},"{f.detail}"\n' for f in flags),
        encoding="utf-8",
    )
    write_manifest(
        out.with_name(out.name + ".manifest.json"), argv,
        {"pm_options": asdict(options), "strict": args.strict},
        {}, [args.input, args.station], {"et0": out, "flags": flags_path},
    )
    rejected = sum(1 for f in flags if f.code == "Rejected")
    print(f"{len(records)} rows written to {out}; {len(flags)} flags ({rejected} rejected)")
    return EXIT_OK


def cmd_synth(args, argv) -> int:
    key = _station_keys([args.profile])[0]
    start = dt.date.fromisoformat(args.start)
    records = synthesize_dataset(PROFILES[key], args.days, args.seed, start)
    out = Path(args.output)
    write_csv(records, out)
    outputs = {"data": out}
    if args.station_out:
        dump_station(STATIONS[key], args.station_out)
        outputs["station"] = Path(args.station_out)
    write_manifest(out.with_name(out.name + ".manifest.json"), argv,
                   {"profile": key, "days": args.days, "start": args.start}, {"seed": args.seed}, [], outputs)
    print(f"{len(records)} synthetic {STATIONS[key].name} days written to {out}")
    return EXIT_OK


def _spec_from_args(args) -> NetworkSpec:
    if args.entry:
        try:
            return find_entry(args.entry).spec
        except KeyError as exc:
            raise CliError(str(exc.args[0]), EXIT_USAGE) from None
    return NetworkSpec.build(_int_list(args.hidden), ActivationKind.parse(args.activation), _float_list(args.dropout))


def cmd_train(args, argv) -> int:
    dataset = _labelled_dataset(args.input, args.station, _pm_options(args), args.strict)
    spec = _spec_from_args(args).with_seed(derive_seed(args.seed, dataset.station, "train"))
    hp = _hyperparams(args)
    try:
        model = train(spec, dataset.x, dataset.y, hp)
    except TrainingError as exc:
        raise CliError(str(exc), EXIT_TRAINING) from None
    out = Path(args.output)
    save_model(model, out)
    write_manifest(out.with_name(out.name + ".manifest.json"), argv,
                   {"spec": spec.to_dict(), "hyperparams": hp.to_dict()}, {"seed": args.seed},
                   [args.input, args.station], {"model": out})
    print(f"trained {spec.architecture} on {len(dataset.y)} records; final loss {model.loss_trace[-1] if model.loss_trace else float('nan'):.6g}")
    return EXIT_OK


def _run_and_write(args, argv, entries, datasets, config: GridConfig, inputs) -> int:
    jobs = args.jobs if args.jobs is not None else int(os.environ.get("ET0_LAB_JOBS", "1"))
    results = run_grid(
        entries, datasets, k=config.folds, seed=config.seed, hp=config.hyperparams,
        jobs=jobs, keep_predictions=args.save_predictions, fold_mode=args.fold_mode,
    )
    out_dir = Path(args.out_dir)
    paths = write_results(results, out_dir, record_timing=args.timing)
    write_manifest(out_dir / "manifest.json", argv, config.to_dict() | {"fold_mode": args.fold_mode},
                   {"seed": config.seed}, inputs, paths)
    ok = sum(1 for r in results for f in r.folds if f.ok)
    total = sum(len(r.folds) for r in results)
    print(f"{ok}/{total} runs succeeded; results in {out_dir}")
    if results:
        print(format_ranking(rank_results(results, top_n=args.top)))
    return EXIT_OK if ok > 0 else EXIT_TRAINING


def cmd_cv(args, argv) -> int:
    options = _pm_options(args)
    dataset = _labelled_dataset(args.input, args.station, options, args.strict)
    try:
        entry = find_entry(args.entry)
    except KeyError as exc:
        raise CliError(str(exc.args[0]), EXIT_USAGE) from None
    config = GridConfig(hyperparams=_hyperparams(args), seed=args.seed, folds=args.folds)
    return _run_and_write(args, argv, [entry], [dataset], config, [args.input, args.station])


def _grid_config(args) -> GridConfig:
    try:
        config = GridConfig.load(args.config) if args.config else GridConfig()
        changes = {}
        if args.families:
            changes["families"] = tuple(f.strip() for f in args.families.split(",") if f.strip())
        if args.no_dropout_grid:
            changes["dropout_grid"] = False
        if args.include_huo:
            changes["include_huo"] = True
        if args.seed is not None:
            changes["seed"] = args.seed
        if args.folds is not None:
            changes["folds"] = args.folds
        config = replace(config, **changes)
        return replace(config, hyperparams=_hyperparams(args, config.hyperparams))
    except (InvalidGridConfig, OSError, json.JSONDecodeError) as exc:
        raise CliError(f"grid config: {exc}", EXIT_USAGE) from None


def cmd_grid(args, argv) -> int:
    config = _grid_config(args)
    entries = build_model_grid(config)
    synthetic = _station_keys(args.synthetic or [])
    n_stations = len(args.station_data or []) + len(synthetic)
    if n_stations == 0:
        raise CliError("give at least one --station-data or --synthetic station", EXIT_USAGE)
    runs = count_runs(len(entries), n_stations, config.folds)
    if args.dry_run:
        print(f"{len(entries)} specs, {runs} runs")
        return EXIT_OK

    options = _pm_options(args)
    datasets, inputs = [], []
    for pair in args.station_data or []:
        try:
            data, cfg = (Path(p) for p in pair.split(","))
        except ValueError:
            raise CliError(f"--station-data expects DATA.csv,STATION.cfg, got {pair!r}", EXIT_USAGE) from None
        datasets.append(_labelled_dataset(data, cfg, options, args.strict))
        inputs += [data, cfg]
    datasets += [_synthetic_dataset(k, args.days, config.seed, options) for k in synthetic]
    log.info("%d specs x %d stations x %d folds = %d runs", len(entries), len(datasets), config.folds, runs)
    return _run_and_write(args, argv, entries, datasets, config, inputs)


def cmd_report(args, argv) -> int:
    path = Path(args.results_dir) / "means.csv"
    if not path.exists():
        raise CliError(f"{path} not found", EXIT_USAGE)
    rows = read_means(path)
    ranked = rank_results(rows, by=args.by, top_n=args.top)
    print(format_ranking(ranked))
    print()
    print(format_family_table(rows))
    if args.output:
        Path(args.output).write_text(ranking_csv(ranked), encoding="utf-8")
    return EXIT_OK


def cmd_scatter(args, argv) -> int:
    try:
        text = scatter_tsv(Path(args.results_dir) / "predictions.csv", args.model)
    except MissingPredictions as exc:
        raise CliError(str(exc), EXIT_USAGE) from None
    Path(args.output).write_text(text, encoding="utf-8")
    print(f"{text.count(chr(10)) - 1} scatter rows written to {args.output}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _pm_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--gamma", choices=("altitude", "fixed"), default="altitude",
                   help="psychrometric constant from altitude or fixed at 0.066")
    p.add_argument("--g", type=float, default=0.0, help="soil heat flux density, MJ m-2 day-1")
    p.add_argument("--albedo", type=float, default=0.23)
    p.add_argument("--radiation", choices=("rs", "rn"), default="rs",
                   help="treat the rs column as solar radiation (rs) or as net radiation (rn)")
    p.add_argument("--strict", action="store_true", help="fail on the first invalid row")
    return p


def _hp_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--optimizer", choices=("adam", "sgd"))
    return p


def _run_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--out-dir", default="results")
    p.add_argument("--jobs", type=int, help="worker processes (default: $ET0_LAB_JOBS or 1)")
    p.add_argument("--save-predictions", action="store_true")
    p.add_argument("--timing", action="store_true", help="fill the seconds columns (breaks byte-identical reruns)")
    p.add_argument("--fold-mode", choices=("random", "chronological"), default="random")
    p.add_argument("--top", type=int, default=20)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="et0", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"et0lab {__version__}")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    pm, hp, run = _pm_parent(), _hp_parent(), _run_parent()

    p = sub.add_parser("compute", parents=[pm], help="FAO-56 PM ET0 for a station CSV")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--station", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("synth", help="synthetic daily weather for a built-in station profile")
    p.add_argument("--profile", required=True, choices=sorted(PROFILES))
    p.add_argument("--days", type=int, default=7300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start", default="1999-01-01")
    p.add_argument("--output", type=Path, required=True)
    p.add_argument("--station-out", type=Path, help="also write the station metadata file")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", parents=[pm, hp], help="train one network on a whole dataset")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--station", type=Path, required=True)
    p.add_argument("--entry", help="grid entry id, e.g. P-DNN-SeLU")
    p.add_argument("--hidden", default="60,90,60")
    p.add_argument("--activation", default="selu", choices=[k.value for k in ActivationKind])
    p.add_argument("--dropout", default="")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", type=Path, required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("cv", parents=[pm, hp, run], help="cross-validate one grid entry")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--station", type=Path, required=True)
    p.add_argument("--entry", required=True)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("grid", parents=[pm, hp, run], help="cross-validate the model grid")
    p.add_argument("--config", type=Path, help="grid config JSON")
    p.add_argument("--station-data", action="append", metavar="DATA.csv,STATION.cfg")
    p.add_argument("--synthetic", action="append", metavar="NAMES",
                   help=f"built-in station profiles ({', '.join(STATIONS)} or all)")
    p.add_argument("--days", type=int, default=7300, help="days per synthetic station")
    p.add_argument("--families", help=f"comma list from {', '.join(FAMILIES)}")
    p.add_argument("--no-dropout-grid", action="store_true")
    p.add_argument("--include-huo", action="store_true")
    p.add_argument("--folds", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--dry-run", action="store_true", help="print counts, train nothing")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("report", help="rank a finished run")
    p.add_argument("--results-dir", required=True)
    p.add_argument("--by", choices=("r2", "rmse", "mae"), default="r2")
    p.add_argument("--top", type=int, default=20)
    p.add_argument("--output", type=Path)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("scatter", help="observed vs predicted TSV from saved predictions")
    p.add_argument("--results-dir", required=True)
    p.add_argument("--model", action="append", help="entry id(s) to include")
    p.add_argument("--output", type=Path, required=True)
    p.set_defaults(func=cmd_scatter)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, ["et0", *argv])
    except CliError as exc:
        print(f"et0 {args.command}: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
