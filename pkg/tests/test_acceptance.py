"""Acceptance gate.  Each test prints one ``ACCEPTANCE <n> ... PASS|FAIL`` line.

Criteria 6-8 train P-DNN-SeLU with the default hyperparameters on twenty
years of synthetic Aksaray weather through the ``et0`` command line, which
takes roughly ten minutes on one core.
"""

import csv
import math
import time

import numpy as np
import pytest

import conftest
from et0lab import cli
from et0lab.experiment import GridConfig, build_model_grid
from et0lab.meteo_data import MeteoRecord
from et0lab.metrics import mae, r2, rmse
from et0lab.nn import ActivationKind, NetworkSpec, TrainedModel, backward, dropout_apply
from et0lab.pm_oracle import PMOptions, et0_penman_monteith
from et0lab.stations import STATIONS

from fao56_reference import reference_et0
from gradcheck import numeric_gradients, relative_error

SEED = 0
DAYS = 7300


def report(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {number} {title}: {'PASS' if ok else 'FAIL'} ({detail})"
    conftest.ACCEPTANCE_LINES[number] = line
    print(line)


# -- 1 ---------------------------------------------------------------------

def _random_records(n, seed):
    rng = np.random.default_rng(seed)
    base = np.datetime64("2001-01-01")
    out = []
    for i in range(n):
        t_min = rng.uniform(-15, 28)
        t_max = t_min + rng.uniform(0, 22)
        rh_min = rng.uniform(5, 100)
        rh_max = rh_min + rng.uniform(0, 110 - rh_min)
        day = (base + np.timedelta64(int(rng.integers(0, 730)), "D")).item()
        out.append(MeteoRecord(day, t_max, t_min, rng.uniform(0, 33), rh_max, rh_min, rng.uniform(0, 8)))
    return out


def test_1_pm_oracle_equivalence():
    keys = list(STATIONS)
    records = _random_records(1000, seed=101)
    stations = [STATIONS[keys[i % 4]] for i in range(1000)]
    started = time.perf_counter()
    fixed = np.array([et0_penman_monteith(r, s, PMOptions(gamma_mode="fixed")) for r, s in zip(records, stations)])
    alt = np.array([et0_penman_monteith(r, s) for r, s in zip(records, stations)])
    elapsed = (time.perf_counter() - started) / 2

    cols = {
        "tmax": [r.t_max for r in records], "tmin": [r.t_min for r in records], "rs": [r.r_s for r in records],
        "rhmax": [r.rh_max for r in records], "rhmin": [r.rh_min for r in records], "u2": [r.u2 for r in records],
        "doy": [r.date.timetuple().tm_yday for r in records],
        "lat": [s.latitude for s in stations], "z": [s.altitude for s in stations],
    }
    args = [cols[k] for k in ("tmax", "tmin", "rs", "rhmax", "rhmin", "u2", "doy", "lat", "z")]
    err_fixed = np.abs(fixed - reference_et0(*args, fixed_gamma=True)).max()
    err_alt = np.abs(alt - reference_et0(*args)).max()
    ok = err_fixed <= 1e-6 and err_alt <= 1e-3 and elapsed < 1.0
    report(1, "PM oracle equivalence", ok,
           f"max |diff| fixed-gamma {err_fixed:.2e} <= 1e-6, altitude {err_alt:.2e} <= 1e-3, {elapsed:.3f} s per 1000 records")
    assert ok


# -- 2 ---------------------------------------------------------------------

def test_2_gradient_correctness():
    started = time.perf_counter()
    worst = 0.0
    for kind in ActivationKind:
        for widths in ((5,), (60, 90, 60)):
            for draw in range(10):
                spec = NetworkSpec.build(widths, kind, seed=draw)
                init = TrainedModel.initial(spec)
                rng = np.random.default_rng(1000 + draw)
                biases = tuple(rng.normal(0, 0.5, b.shape) for b in init.biases)
                model = TrainedModel(spec, init.weights, biases, init.scaler)
                x, y = rng.normal(size=(4, 6)), rng.normal(size=4)
                gw, gb = backward(model, x, y)
                nw, nb = numeric_gradients(model.weights, model.biases, [k.value for k in spec.kinds], x, y)
                worst = max(worst, max(relative_error(a, n).max() for a, n in zip(gw + gb, nw + nb)))
    elapsed = time.perf_counter() - started
    ok = worst < 1e-4 and elapsed < 30
    report(2, "gradient correctness", ok,
           f"worst relative error {worst:.2e} < 1e-4 over 4 activations x 2 architectures x 10 draws, {elapsed:.1f} s")
    assert ok


# -- 3 ---------------------------------------------------------------------

def test_3_metric_formulas():
    checks = [
        rmse([1.5, 2.5], [1.5, 2.5]) == 0.0,
        abs(rmse([2, 4], [1, 3]) - 1.0) <= 1e-9,
        abs(rmse([0, 2], [0, 0]) - math.sqrt(2)) <= 1e-9,
        mae([1, 2], [1, 2], "standard") == 0.0 and mae([1, 2], [1, 2], "paper_literal") == 0.0,
        abs(mae([1, -1], [0, 0], "standard") - 1.0) <= 1e-9,
        abs(mae([1, -1], [0, 0], "paper_literal") - 0.0) <= 1e-9,
        abs(mae([2, 2], [1, 1], "standard") - 1.0) <= 1e-9,
        abs(mae([2, 2], [1, 1], "paper_literal") - 1.0) <= 1e-9,
        abs(r2(2 * np.arange(1.0, 6.0) + 1, np.arange(1.0, 6.0)) - 1.0) <= 1e-9,
        # exact squared Pearson for obs [1,2,3,4], pred [1,2,3,5] is 6.5**2 / (5 * 8.75) = 169/175
        abs(r2([1, 2, 3, 5], [1, 2, 3, 4]) - 169 / 175) <= 1e-9,
    ]
    rng = np.random.default_rng(3)
    violations = 0
    for _ in range(10_000):
        n = int(rng.integers(1, 50))
        s, o = rng.normal(size=n) * rng.uniform(0.1, 10), rng.normal(size=n) * rng.uniform(0.1, 10)
        violations += rmse(s, o) < mae(s, o)
    ok = all(checks) and violations == 0
    report(3, "metric formulas", ok,
           f"{sum(checks)}/{len(checks)} hand-derived examples to 1e-9 (r2 example exact value 169/175 = 0.965714), "
           f"rmse >= mae violations {violations}/10000")
    assert ok


# -- 4 ---------------------------------------------------------------------

def test_4_dropout_expectation():
    means, exact = [], True
    for i, rate in enumerate((0.1, 0.2, 0.3, 0.4, 0.5)):
        ones = np.ones(100_000)
        means.append(dropout_apply(ones, rate, training=True, mask_seed=40 + i).mean())
        exact &= dropout_apply(ones, rate, training=False, mask_seed=40 + i).mean() == 1.0
    ok = all(abs(m - 1.0) <= 0.02 for m in means) and exact
    report(4, "dropout expectation", ok,
           "training means " + ", ".join(f"{m:.4f}" for m in means) + f"; inference exactly 1.0: {exact}")
    assert ok


# -- 5 ---------------------------------------------------------------------

def test_5_grid_fidelity(capsys):
    total = len(build_model_grid())
    ann = len(build_model_grid(GridConfig(families=("L-ANN",))))
    dnn = len(build_model_grid(GridConfig(families=("L-DNN-Saggi", "P-DNN-ReLU", "P-DNN-SeLU"))))
    code = cli.main(["grid", "--synthetic", "all", "--dry-run"])
    printed = capsys.readouterr().out.strip()
    ok = (total, ann, dnn) == (678, 30, 648) and code == 0 and printed == "678 specs, 13560 runs"
    with capsys.disabled():
        report(5, "grid fidelity", ok, f"{ann} + {dnn} = {total} entries; dry run prints '{printed}'")
    assert ok


# -- 6, 7, 8 -------------------------------------------------------------------

def _cv(workdir, out, entry):
    data, cfg = workdir / "aksaray.csv", workdir / "aksaray.cfg"
    started = time.perf_counter()
    code = cli.main(["cv", "--input", str(data), "--station", str(cfg), "--entry", entry, "--seed", str(SEED),
                     "--save-predictions", "--out-dir", str(out)])
    return code, time.perf_counter() - started


def _means(path):
    with open(path / "means.csv", newline="") as fh:
        return next(csv.DictReader(fh))


@pytest.fixture(scope="session")
def replication(tmp_path_factory):
    work = tmp_path_factory.mktemp("replication")
    assert cli.main(["synth", "--profile", "aksaray", "--days", str(DAYS), "--seed", str(SEED),
                     "--output", str(work / "aksaray.csv"), "--station-out", str(work / "aksaray.cfg")]) == 0
    runs = {}
    runs["plain"] = (work / "plain", *_cv(work, work / "plain", "P-DNN-SeLU"))
    runs["dropout"] = (work / "dropout", *_cv(work, work / "dropout", "P-DNN-SeLU-dropout-0-0.1-0"))
    return work, runs


def test_6_desk_scale_replication(replication):
    work, runs = replication
    out, code, seconds = runs["plain"]
    m = _means(out)
    r2_, rmse_ = float(m["r2"]), float(m["rmse"])
    assert cli.main(["scatter", "--results-dir", str(out), "--output", str(work / "scatter.tsv")]) == 0
    rows = np.loadtxt(work / "scatter.tsv", delimiter="\t", skiprows=1, usecols=(2, 3))
    slope = np.polyfit(rows[:, 0], rows[:, 1], 1)[0]
    ok = code == 0 and int(m["folds_ok"]) == 5 and r2_ >= 0.98 and rmse_ <= 0.3 and 0.95 <= slope <= 1.05
    report(6, "desk-scale replication", ok,
           f"P-DNN-SeLU 5-fold on {DAYS} synthetic Aksaray days: mean R2 {r2_:.4f} >= 0.98, RMSE {rmse_:.4f} <= 0.3, "
           f"MAE {float(m['mae_standard']):.4f}; scatter slope {slope:.4f}; {seconds / 60:.1f} min")
    assert ok


def test_7_dropout_does_not_help(replication):
    _, runs = replication
    plain = float(_means(runs["plain"][0])["r2"])
    dropped = float(_means(runs["dropout"][0])["r2"])
    ok = runs["dropout"][1] == 0 and dropped <= plain + 0.002
    report(7, "dropout-hurts replication", ok,
           f"dropout (0, 0.1, 0) mean R2 {dropped:.4f} vs no dropout {plain:.4f}, margin {dropped - plain:+.4f} <= +0.002")
    assert ok


def test_8_determinism(replication):
    work, runs = replication
    first = runs["plain"][0]
    code, _ = _cv(work, work / "again", "P-DNN-SeLU")
    names = ("folds.csv", "means.csv", "errors.csv", "predictions.csv")
    same = [(first / n).read_bytes() == (work / "again" / n).read_bytes() for n in names]
    ok = code == 0 and all(same)
    report(8, "determinism", ok, f"rerun with seed {SEED}: {sum(same)}/{len(names)} result CSVs byte-identical")
    assert ok
