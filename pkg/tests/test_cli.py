"""Command-line interface: every subcommand plus config-file precedence."""

import json
import pathlib

import numpy as np
import pytest

from nvar.cli import main
from nvar.geometry import load_distance_csv
from nvar.model import NvarModel, SeriesPanel

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


def run(*argv):
    return main([str(a) for a in argv])


def test_simulate_writes_panel_and_model(tmp_path):
    assert run("simulate", "--case", 1, "--p", 12, "--d0", 1, "--n", 40,
               "--seed", 3, "--out-dir", tmp_path) == 0
    panel = SeriesPanel.from_csv(tmp_path / "panel.csv")
    assert panel.p == 12 and panel.n == 40
    model = NvarModel.from_json(tmp_path / "model.json")
    assert model.radius == 1.0


def test_simulate_case3_also_writes_layout(tmp_path):
    assert run("simulate", "--case", 3, "--p", 20, "--d0", 1, "--n", 30,
               "--out-dir", tmp_path) == 0
    text = (tmp_path / "layout.csv").read_text().splitlines()
    assert text[0] == "id,x,y"
    assert len(text) == 21


def test_simulate_seed_flag_changes_output(tmp_path):
    run("simulate", "--p", 10, "--n", 20, "--seed", 1, "--out-dir", tmp_path / "a")
    run("simulate", "--p", 10, "--n", 20, "--seed", 1, "--out-dir", tmp_path / "b")
    run("simulate", "--p", 10, "--n", 20, "--seed", 2, "--out-dir", tmp_path / "c")
    a = (tmp_path / "a" / "panel.csv").read_text()
    assert a == (tmp_path / "b" / "panel.csv").read_text()
    assert a != (tmp_path / "c" / "panel.csv").read_text()


def test_fit_nvar_on_simulated_panel(tmp_path):
    run("simulate", "--case", 1, "--p", 12, "--d0", 1, "--n", 120,
        "--sigma", "0.3", "--seed", 4, "--out-dir", tmp_path)
    assert run("fit", "--panel", tmp_path / "panel.csv", "--lattice", "1d",
               "--radii", "0,1,2,3", "--out-dir", tmp_path / "fit") == 0
    report = json.loads((tmp_path / "fit" / "report.json").read_text())
    assert report["d_hat"] == 1.0
    assert (tmp_path / "fit" / "bic_table.csv").exists()
    model = NvarModel.from_json(tmp_path / "fit" / "model.json")
    assert model.p == 12


def test_fit_requires_exactly_one_distance_source(tmp_path):
    run("simulate", "--p", 8, "--n", 50, "--out-dir", tmp_path)
    assert run("fit", "--panel", tmp_path / "panel.csv",
               "--out-dir", tmp_path) == 1  # no source at all


def test_fit_lasso_writes_round_trippable_model(tmp_path):
    run("simulate", "--p", 8, "--n", 60, "--out-dir", tmp_path)
    assert run("fit", "--method", "lasso", "--panel", tmp_path / "panel.csv",
               "--out-dir", tmp_path / "lasso") == 0
    model = NvarModel.from_json(tmp_path / "lasso" / "model.json")
    assert model.p == 8
    report = json.loads((tmp_path / "lasso" / "report.json").read_text())
    assert len(report["chosen_lambda"]) == 8


def test_full_pipeline_simulate_fit_predict(tmp_path):
    run("simulate", "--case", 1, "--p", 10, "--d0", 1, "--n", 150,
        "--sigma", "0.5", "--seed", 6, "--out-dir", tmp_path)
    run("fit", "--panel", tmp_path / "panel.csv", "--lattice", "1d",
        "--radii", "0,1,2", "--train-fraction", "0.8",
        "--out-dir", tmp_path / "nvar")
    assert run("predict", "--panel", tmp_path / "panel.csv",
               "--model", tmp_path / "nvar" / "model.json",
               "--split", "0.8", "--out-dir", tmp_path) == 0
    lines = (tmp_path / "mspe.csv").read_text().strip().splitlines()
    assert lines[0] == "method,bandwidth,mspe,seconds"
    assert len(lines) == 2
    assert float(lines[1].split(",")[2]) > 0


def test_bench_writes_summary_files(tmp_path):
    assert run("bench", "--case", 1, "--p", 8, "--d0", 1, "--sigma", 1,
               "--n", 60, "--reps", 2, "--methods", "nvar,bvar",
               "--radii", "0,1,2", "--out-dir", tmp_path) == 0
    summary = (tmp_path / "summary.csv").read_text().splitlines()
    assert len(summary) == 3  # header + one row per method
    blob = json.loads((tmp_path / "summary.json").read_text())
    assert blob[0]["config"]["reps"] == 2


def test_ingest_fixture_selects_complete_block(tmp_path):
    assert run("ingest", "--records", FIXTURES / "stream_records.csv",
               "--out-dir", tmp_path) == 0
    sel = json.loads((tmp_path / "selection.json").read_text())
    assert sel["p"] == 8 and sel["n"] == 48
    assert sel["window"] == ["2015-01", "2018-12"]
    panel = SeriesPanel.from_csv(tmp_path / "panel.csv")
    assert panel.values.shape == (8, 48)
    assert np.allclose(panel.values.mean(axis=1), 0.0, atol=1e-9)  # centered


def test_distances_from_layout(tmp_path):
    assert run("distances", "--layout", FIXTURES / "stream_locations.csv",
               "--scale", "1.0", "--out-dir", tmp_path) == 0
    d = load_distance_csv(tmp_path / "distances.csv")
    assert d.p == 10


def test_config_file_and_flag_precedence(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"p": 6, "n": 30, "seed": 9}))
    assert run("simulate", "--config", config, "--out-dir", tmp_path / "a") == 0
    assert SeriesPanel.from_csv(tmp_path / "a" / "panel.csv").p == 6
    # explicit flag beats the config file
    assert run("simulate", "--config", config, "--p", 4,
               "--out-dir", tmp_path / "b") == 0
    assert SeriesPanel.from_csv(tmp_path / "b" / "panel.csv").p == 4


def test_errors_exit_nonzero(tmp_path):
    assert run("fit", "--panel", tmp_path / "missing.csv",
               "--lattice", "1d", "--out-dir", tmp_path) == 1
    assert run("predict", "--panel", tmp_path / "missing.csv",
               "--model", tmp_path / "missing.json",
               "--out-dir", tmp_path) == 1
