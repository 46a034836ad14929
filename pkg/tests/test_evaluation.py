"""Error metrics, one-step MSPE, and the Monte Carlo harness."""

import csv

import numpy as np
import pytest

from nvar.errors import InsufficientTestSpanError, ShapeMismatchError
from nvar.evaluation import (SummaryTable, coefficient_errors,
                             coefficient_errors_per_lag, mspe_one_step,
                             run_monte_carlo, run_replication,
                             summaries_to_csv, trials_to_csv)
from nvar.geometry import lattice1d_distances
from nvar.model import NoiseSpec, NvarModel, SeriesPanel, simulate


def diag_model(p, value=0.5, q=1):
    d = lattice1d_distances(p)
    return NvarModel(coeffs=tuple(np.eye(p) * value / (r + 1)
                                  for r in range(q)),
                     radius=0.0, distance=d)


def test_coefficient_errors_known_difference():
    a = diag_model(3, 0.5)
    b = diag_model(3, 0.2)
    l2, frob = coefficient_errors(a, b)
    assert l2 == pytest.approx(0.3)
    assert frob == pytest.approx(0.3 * np.sqrt(3))
    assert coefficient_errors(a, a) == (0.0, 0.0)


def test_coefficient_errors_accept_raw_arrays_and_reject_mismatch():
    a = diag_model(3, 0.5)
    l2, _ = coefficient_errors([np.eye(3) * 0.5], a)
    assert l2 == 0.0
    with pytest.raises(ShapeMismatchError):
        coefficient_errors([np.eye(4)], a)
    with pytest.raises(ShapeMismatchError):
        coefficient_errors_per_lag([np.eye(3)] * 2, [np.eye(3)])


def test_mspe_one_step_matches_manual_rolling_forecast():
    truth = diag_model(4, 0.6, q=2)
    panel = simulate(truth, NoiseSpec(0.3), 60, seed=30)
    got = mspe_one_step(truth, panel, split=0.75)
    v = panel.values
    train_len = 45
    errs = []
    for t in range(train_len, 60):
        pred = truth.coeffs[0] @ v[:, t - 1] + truth.coeffs[1] @ v[:, t - 2]
        errs.append(np.mean((v[:, t] - pred) ** 2))
    assert got == pytest.approx(float(np.mean(errs)))


def test_mspe_one_step_horizon_cap_and_errors():
    truth = diag_model(3, 0.5)
    panel = simulate(truth, NoiseSpec(0.5), 40, seed=31)
    full = mspe_one_step(truth, panel, split=0.5)
    capped = mspe_one_step(truth, panel, split=0.5, horizon=5)
    assert np.isfinite(full) and np.isfinite(capped)
    with pytest.raises(InsufficientTestSpanError):
        mspe_one_step(truth, panel, split=0.5, horizon=100)
    with pytest.raises(ValueError):
        mspe_one_step(truth, panel, split=1.0)


def test_run_replication_returns_one_trial_per_method():
    trials = run_replication(1, 10, 1, 0.5, 80, ["nvar", "bvar", "lasso"],
                             seed=40, replication=3)
    assert [t.method for t in trials] == ["nvar", "bvar", "lasso"]
    assert all(t.l2_error >= 0 and t.frob_error >= 0 for t in trials)
    assert np.isnan(trials[2].d_hat)  # lasso has no bandwidth
    assert trials[0].replication == 3


def test_run_monte_carlo_deterministic_and_summarized():
    kwargs = dict(reps=3, methods=["nvar", "bvar"], seed=50,
                  radii=[0.0, 1.0, 2.0])
    a = run_monte_carlo(1, 8, 1, 0.5, 60, **kwargs)
    b = run_monte_carlo(1, 8, 1, 0.5, 60, **kwargs)
    assert a.mean_l2("nvar") == b.mean_l2("nvar")
    assert a.bandwidth_histogram("bvar") == b.bandwidth_histogram("bvar")
    assert len(a.trials["nvar"]) == 3
    assert sum(a.bandwidth_histogram("nvar").values()) == 3
    text = a.render_text()
    assert "nvar" in text and "bvar" in text


def test_run_monte_carlo_rejects_bad_inputs():
    with pytest.raises(ValueError):
        run_monte_carlo(1, 8, 1, 0.5, 60, reps=0)
    with pytest.raises(ValueError):
        run_monte_carlo(1, 8, 1, 0.5, 60, reps=1, methods=["nope"])


def test_case2_requires_perfect_square():
    with pytest.raises(ValueError):
        run_replication(2, 10, 1, 0.5, 60, ["nvar"], seed=0, replication=0)
    # the harness records the failure instead of aborting the whole run
    table = run_monte_carlo(2, 10, 1, 0.5, 60, reps=1, methods=["nvar"])
    assert table.failures["nvar"]
    assert not table.trials["nvar"]


def test_summary_csv_outputs(tmp_path):
    table = run_monte_carlo(1, 8, 1, 0.5, 60, reps=2,
                            methods=["nvar"], seed=60, radii=[0.0, 1.0])
    spath = tmp_path / "summary.csv"
    summaries_to_csv([table], spath)
    with open(spath) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1
    assert rows[0]["method"] == "nvar"
    assert float(rows[0]["mean_l2"]) == pytest.approx(table.mean_l2("nvar"))
    tpath = tmp_path / "trials.csv"
    trials_to_csv([table], tpath)
    with open(tpath) as fh:
        trows = list(csv.DictReader(fh))
    assert len(trows) == 2
    blob = table.to_dict()
    assert blob["config"]["reps"] == 2 and "nvar" in blob["methods"]
