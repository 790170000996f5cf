import json

import pytest

from et0lab import cli
from et0lab.meteo_data import synthesize_dataset, write_csv
from et0lab.stations import PROFILES

STATION_CFG = "[station]\nname = Aksaray\ncode = 2\nlongitude = 34.0\nlatitude = 38.37\naltitude = 970\n"


@pytest.fixture()
def station_files(tmp_path):
    data = tmp_path / "data.csv"
    write_csv(synthesize_dataset(PROFILES["aksaray"], 10, seed=1), data)
    cfg = tmp_path / "station.cfg"
    cfg.write_text(STATION_CFG)
    return data, cfg


def _run(*argv):
    return cli.main([str(a) for a in argv])


def test_compute_writes_one_row_per_record(station_files, tmp_path):
    data, cfg = station_files
    out = tmp_path / "et0.csv"
    assert _run("compute", "--input", data, "--station", cfg, "--output", out) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "date,et0_mm_day"
    assert len(lines) == 11
    assert float(lines[1].split(",")[1]) > 0
    manifest = json.loads((tmp_path / "et0.csv.manifest.json").read_text())
    assert set(manifest["outputs"]) == {"et0", "flags"}
    assert manifest["version"] and manifest["config_digest"]


def _with_bad_row(data):
    lines = data.read_text().splitlines()
    fields = lines[4].split(",")
    fields[1], fields[2] = "-5.0", "5.0"
    lines[4] = ",".join(fields)
    data.write_text("\n".join(lines) + "\n")


def test_compute_strict_exit_code(station_files, tmp_path, capsys):
    data, cfg = station_files
    _with_bad_row(data)
    assert _run("compute", "--input", data, "--station", cfg, "--output", tmp_path / "o.csv", "--strict") == 3
    assert "row 3" in capsys.readouterr().err


def test_compute_lenient_skips_bad_row(station_files, tmp_path):
    data, cfg = station_files
    _with_bad_row(data)
    out = tmp_path / "o.csv"
    assert _run("compute", "--input", data, "--station", cfg, "--output", out) == 0
    assert len(out.read_text().splitlines()) == 10
    flags = (tmp_path / "o.csv.flags.csv").read_text().splitlines()
    assert len(flags) == 2 and flags[1].startswith("3,Rejected")


def test_compute_schema_error(station_files, tmp_path):
    data, cfg = station_files
    data.write_text("date,tmax\n2000-01-01,3\n")
    assert _run("compute", "--input", data, "--station", cfg, "--output", tmp_path / "o.csv") == 2


def test_compute_fixed_gamma_differs(station_files, tmp_path):
    data, cfg = station_files
    _run("compute", "--input", data, "--station", cfg, "--output", tmp_path / "a.csv")
    _run("compute", "--input", data, "--station", cfg, "--output", tmp_path / "b.csv", "--gamma", "fixed")
    assert (tmp_path / "a.csv").read_text() != (tmp_path / "b.csv").read_text()


def test_usage_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        cli.main(["grid", "--bogus"])
    assert info.value.code == 2
    with pytest.raises(SystemExit):
        cli.main([])


def test_grid_dry_run(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert _run("grid", "--synthetic", "all", "--dry-run") == 0
    assert capsys.readouterr().out.strip() == "678 specs, 13560 runs"
    assert _run("grid", "--synthetic", "aksaray,adana", "--families", "P-DNN-SeLU", "--no-dropout-grid", "--dry-run") == 0
    assert capsys.readouterr().out.strip() == "1 specs, 10 runs"
    assert list(tmp_path.iterdir()) == []


def test_grid_needs_a_station(capsys):
    assert _run("grid", "--dry-run") == 2


def test_grid_config_errors(tmp_path):
    bad = tmp_path / "g.json"
    bad.write_text('{"families": ["CNN"]}')
    assert _run("grid", "--config", bad, "--synthetic", "adana", "--dry-run") == 2


def _small_grid(out_dir, *extra):
    return _run("grid", "--synthetic", "aksaray", "--days", 200, "--families", "P-DNN-SeLU",
                "--no-dropout-grid", "--epochs", 2, "--folds", 3, "--seed", 7, "--out-dir", out_dir, *extra)


def test_grid_run_is_byte_identical(tmp_path):
    assert _small_grid(tmp_path / "a", "--save-predictions") == 0
    assert _small_grid(tmp_path / "b", "--save-predictions", "--jobs", 2) == 0
    for name in ("folds.csv", "means.csv", "errors.csv", "predictions.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["seeds"] == {"seed": 7}
    assert set(manifest["outputs"]) == {"folds", "means", "errors", "predictions"}
    assert len((tmp_path / "a" / "folds.csv").read_text().splitlines()) == 4


def test_report_and_scatter(tmp_path, capsys):
    run = tmp_path / "run"
    assert _small_grid(run) == 0
    assert _run("scatter", "--results-dir", run, "--output", tmp_path / "s.tsv") == 2
    assert _small_grid(run, "--save-predictions") == 0
    capsys.readouterr()
    assert _run("report", "--results-dir", run, "--output", tmp_path / "rank.csv") == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].split() == ["Order", "model", "name", "station", "name", "R2", "RMSE", "MAE"]
    assert "P-DNN-SeLU" in out
    assert (tmp_path / "rank.csv").read_text().startswith("order,model_name,station,r2,rmse,mae\n")
    assert _run("scatter", "--results-dir", run, "--output", tmp_path / "s.tsv", "--model", "P-DNN-SeLU") == 0
    assert len((tmp_path / "s.tsv").read_text().splitlines()) == 201


def test_total_divergence_exit_4(tmp_path):
    cfg = tmp_path / "g.json"
    cfg.write_text('{"families": ["L-ANN"], "ann_width_range": [3, 3]}')
    code = _run("grid", "--config", cfg, "--synthetic", "adana", "--days", 100, "--folds", 2,
                "--optimizer", "sgd", "--learning-rate", 1e6, "--epochs", 50, "--out-dir", tmp_path / "r")
    assert code == 4
    assert "DivergedLoss" in (tmp_path / "r" / "errors.csv").read_text()


def test_synth_and_train(tmp_path):
    for name in ("a.csv", "b.csv"):
        assert _run("synth", "--profile", "nigde", "--days", 60, "--seed", 3, "--output", tmp_path / name,
                    "--station-out", tmp_path / "n.cfg") == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    model = tmp_path / "m.json"
    assert _run("train", "--input", tmp_path / "a.csv", "--station", tmp_path / "n.cfg", "--hidden", "5,4",
                "--activation", "relu", "--dropout", "0.1", "--epochs", 2, "--output", model) == 0
    data = json.loads(model.read_text())
    assert data["spec"]["hidden"] == [[5, "relu"], [4, "relu"]]
    assert len(data["loss_trace"]) == 2


def test_cv_command(station_files, tmp_path):
    data, cfg = station_files
    write_csv(synthesize_dataset(PROFILES["aksaray"], 80, seed=2), data)
    assert _run("cv", "--input", data, "--station", cfg, "--entry", "L-ANN-4", "--epochs", 2,
                "--out-dir", tmp_path / "cv") == 0
    assert len((tmp_path / "cv" / "folds.csv").read_text().splitlines()) == 6
    assert _run("cv", "--input", data, "--station", cfg, "--entry", "nope", "--out-dir", tmp_path / "x") == 2
