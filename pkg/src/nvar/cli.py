"""Command-line entry point.

Subcommands: simulate | fit | predict | bench | ingest | distances.
Flag values override the optional JSON config file (--config), which in
turn overrides built-in defaults. All diagnostics go to stderr; data go
to files under --out-dir. Every command honors --seed deterministically.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import baselines, estimation, evaluation, geometry, ingest as ingest_mod, model as model_mod
from .errors import NvarError


def _parse_float_list(text: str) -> list[float]:
    return [float(x) for x in str(text).split(",") if x != ""]


def _parse_int_list(text: str) -> list[int]:
    return [int(x) for x in str(text).split(",") if x != ""]


DEFAULTS = {
    "seed": 0,
    "threads": 1,
    "out_dir": ".",
    "case": 1,
    "p": 100,
    "d0": 1,
    "sigma": 1.0,
    "n": 200,
    "burn_in": 0,
    "init": "unit",
    "reps": 50,
    "q": 1,
    "q_grid": "1",
    "radii": "0,1,2,3,4",
    "c_n": None,
    "method": "nvar",
    "methods": "nvar,bvar",
    "ordering": "identity",
    "split": 0.8,
    "horizon": None,
    "fraction": 0.8,
    "train_fraction": 1.0,
    "center": True,
    "prune": False,
    "lenient": False,
    "lasso_n_lambdas": 50,
    "lasso_min_ratio": 1e-3,
    "lasso_selection": "aic",
    "lasso_c_n": None,
    "scale": "auto",
    "trials_csv": False,
}


def _effective(args: argparse.Namespace) -> dict:
    """defaults < config file < explicit flags."""
    merged = dict(DEFAULTS)
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        with open(cfg_path) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise NvarError(f"{cfg_path}: config must be a JSON object")
        for key, value in cfg.items():
            merged[key.replace("-", "_")] = value
    for key, value in vars(args).items():
        if key in ("command", "config"):
            continue
        if value is not None:
            merged[key] = value
    return merged


def _out_dir(cfg) -> Path:
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _lasso_config(cfg) -> baselines.LassoConfig:
    return baselines.LassoConfig(
        n_lambdas=int(cfg["lasso_n_lambdas"]),
        lambda_min_ratio=float(cfg["lasso_min_ratio"]),
        selection=str(cfg["lasso_selection"]),
        c_n=None if cfg["lasso_c_n"] is None else float(cfg["lasso_c_n"]),
    )


def _subset_layout(layout: geometry.SensorLayout, ids) -> geometry.SensorLayout:
    """Restrict a layout to the panel's series, in panel order."""
    if ids is None or tuple(ids) == layout.ids:
        return layout
    missing = [s for s in ids if s not in layout.ids]
    if missing:
        if len(ids) == layout.p:
            # sizes agree but names do not; match by position
            return layout
        raise NvarError(f"layout is missing panel series: {missing}")
    rows = [layout.ids.index(s) for s in ids]
    coords = None if layout.coordinates is None else layout.coordinates[rows]
    adj = None
    if layout.adjacency is not None:
        adj = layout.adjacency[np.ix_(rows, rows)]
    return geometry.SensorLayout(ids=tuple(ids), coordinates=coords,
                                 adjacency=adj)


def _load_distance_source(cfg, ids=None) -> tuple[geometry.DistanceMatrix, geometry.SensorLayout | None]:
    """Resolve the distance matrix from one of the three accepted sources."""
    given = [k for k in ("distances", "layout", "lattice") if cfg.get(k)]
    if len(given) != 1:
        raise NvarError(
            "exactly one distance source is required: "
            "--distances CSV, --layout CSV, or --lattice {1d,2d}"
        )
    if cfg.get("distances"):
        return geometry.load_distance_csv(cfg["distances"]), None
    if cfg.get("layout"):
        layout = _subset_layout(geometry.load_layout_csv(cfg["layout"]), ids)
        scale = cfg["scale"]
        return geometry.euclidean_distances(layout, scale=scale), layout
    kind = str(cfg["lattice"]).lower()
    p = int(cfg["p"])
    if kind == "1d":
        return geometry.lattice1d_distances(p), None
    if kind == "2d":
        side = int(round(p ** 0.5))
        if side * side != p:
            raise NvarError("2-D lattice requires p to be a perfect square")
        return geometry.lattice2d_distances(side), None
    raise NvarError("--lattice must be 1d or 2d")


def cmd_simulate(cfg) -> int:
    out = _out_dir(cfg)
    case, p, d0, seed = int(cfg["case"]), int(cfg["p"]), int(cfg["d0"]), int(cfg["seed"])
    layout, truth = evaluation.generate_for_case(case, p, d0, seed)
    panel = model_mod.simulate(
        truth, model_mod.NoiseSpec(float(cfg["sigma"])), int(cfg["n"]),
        burn_in=int(cfg["burn_in"]), seed=seed, init=str(cfg["init"]),
    )
    panel.to_csv(out / "panel.csv")
    truth.to_json(out / "model.json")
    if layout is not None:
        with open(out / "layout.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id", "x", "y"])
            for sid, (x, y) in zip(layout.ids, layout.coordinates):
                writer.writerow([sid, format(x, ".17g"), format(y, ".17g")])
        print(f"wrote {out / 'layout.csv'}", file=sys.stderr)
    print(f"wrote {out / 'panel.csv'} and {out / 'model.json'}", file=sys.stderr)
    return 0


def cmd_fit(cfg) -> int:
    out = _out_dir(cfg)
    if not cfg.get("panel"):
        raise NvarError("--panel is required")
    panel = model_mod.SeriesPanel.from_csv(cfg["panel"])
    if float(cfg["train_fraction"]) < 1.0:
        panel, _ = ingest_mod.split_train_test(panel, float(cfg["train_fraction"]))
    method = cfg["method"]
    c_n = None if cfg["c_n"] is None else float(cfg["c_n"])
    q_grid = _parse_int_list(cfg["q_grid"]) if cfg.get("q_grid") else [int(cfg["q"])]
    if method == "lasso":
        coeffs, details = baselines.fit_lasso(panel, q_grid[0], _lasso_config(cfg))
        doc = {
            "method": "lasso",
            "q": q_grid[0],
            "chosen_lambda": details["chosen_lambda"].tolist(),
            "nonzeros": details["nonzeros"].tolist(),
            "coeffs": [a.tolist() for a in coeffs],
        }
        with open(out / "report.json", "w") as fh:
            json.dump(doc, fh)
        # lasso has no distance metric; ship coefficients with an all-zero
        # distance matrix and infinite radius so the model file round-trips
        dist = geometry.DistanceMatrix(np.zeros((panel.p, panel.p)))
        model_mod.NvarModel(coeffs=tuple(coeffs), radius=0.0, distance=dist).to_json(out / "model.json")
        print(f"wrote {out / 'report.json'} and {out / 'model.json'}", file=sys.stderr)
        return 0
    if method == "bvar":
        if cfg.get("layout"):
            layout = _subset_layout(geometry.load_layout_csv(cfg["layout"]),
                                    panel.series_ids())
        else:
            panel_ids = panel.series_ids()
            layout = geometry.SensorLayout(ids=panel_ids)
        radii = [float(r) for r in _parse_float_list(cfg["radii"])]
        cap = panel.p // 2
        hood_sizes = lambda r: 2 * int(r) + 1
        radii = [r for r in radii if hood_sizes(r) <= max(cap, 1)] or [0.0]
        fitted, report = baselines.fit_bvar(
            panel, layout, cfg["ordering"], q_grid[0], radii, c_n=c_n,
            prune=bool(cfg["prune"]),
        )
    elif method == "nvar":
        dist, _ = _load_distance_source({**cfg, "p": panel.p},
                                        ids=panel.series_ids())
        if cfg.get("radii") and cfg["radii"] != "auto":
            radii = _parse_float_list(cfg["radii"])
        else:
            radii = geometry.candidate_radii(dist)
        fitted, report = estimation.fit_nvar(
            panel, dist, q_grid, radii, c_n=c_n, prune=bool(cfg["prune"]),
        )
    else:
        raise NvarError(f"unknown method {method!r}")
    fitted.to_json(out / "model.json")
    report.to_json(out / "report.json")
    report.bic_table_to_csv(out / "bic_table.csv")
    print(f"d_hat = {report.d_hat:g}, q = {report.q}", file=sys.stderr)
    print(f"wrote {out / 'model.json'}, {out / 'report.json'}, {out / 'bic_table.csv'}",
          file=sys.stderr)
    return 0


def cmd_predict(cfg) -> int:
    out = _out_dir(cfg)
    if not cfg.get("model") or not cfg.get("panel"):
        raise NvarError("--model and --panel are required")
    panel = model_mod.SeriesPanel.from_csv(cfg["panel"])
    horizon = None if cfg["horizon"] is None else int(cfg["horizon"])
    rows = []
    for path in cfg["model"]:
        fitted = model_mod.NvarModel.from_json(path)
        start = time.perf_counter()
        mspe = evaluation.mspe_one_step(fitted, panel, float(cfg["split"]), horizon)
        seconds = time.perf_counter() - start
        label = Path(path).stem
        if label == "model" and Path(path).parent.name:
            label = Path(path).parent.name  # fit writes <method>/model.json
        rows.append({
            "method": label,
            "bandwidth": fitted.radius,
            "mspe": mspe,
            "seconds": seconds,
        })
    with open(out / "mspe.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["method", "bandwidth", "mspe", "seconds"])
        writer.writeheader()
        writer.writerows(rows)
    for row in rows:
        print(f"{row['method']}: bandwidth={row['bandwidth']:g} "
              f"mspe={row['mspe']:.6g} seconds={row['seconds']:.3f}", file=sys.stderr)
    print(f"wrote {out / 'mspe.csv'}", file=sys.stderr)
    return 0


def cmd_bench(cfg) -> int:
    out = _out_dir(cfg)
    cases = _parse_int_list(str(cfg["case"]))
    ps = _parse_int_list(str(cfg["p"]))
    d0s = _parse_float_list(str(cfg["d0"]))
    sigmas = _parse_float_list(str(cfg["sigma"]))
    methods = [m.strip() for m in str(cfg["methods"]).split(",") if m.strip()]
    radii = _parse_float_list(cfg["radii"])
    c_n = None if cfg["c_n"] is None else float(cfg["c_n"])
    tables = []
    for case in cases:
        for p in ps:
            for d0 in d0s:
                for sigma in sigmas:
                    def progress(done, total, _cfg=(case, p, d0, sigma)):
                        print(f"case={_cfg[0]} p={_cfg[1]} d0={_cfg[2]:g} "
                              f"sigma={_cfg[3]:g}: {done}/{total}",
                              file=sys.stderr, end="\r")
                    table = evaluation.run_monte_carlo(
                        case, p, d0, sigma, int(cfg["n"]), int(cfg["reps"]),
                        methods=methods, seed=int(cfg["seed"]), radii=radii,
                        c_n=c_n, burn_in=int(cfg["burn_in"]),
                        init=str(cfg["init"]), lasso_config=_lasso_config(cfg),
                        threads=int(cfg["threads"]), progress=progress,
                    )
                    print("", file=sys.stderr)
                    print(table.render_text(), file=sys.stderr)
                    tables.append(table)
    evaluation.summaries_to_csv(tables, out / "summary.csv")
    with open(out / "summary.json", "w") as fh:
        json.dump([table.to_dict() for table in tables], fh, indent=2)
    if cfg["trials_csv"]:
        evaluation.trials_to_csv(tables, out / "trials.csv")
    print(f"wrote {out / 'summary.csv'} and {out / 'summary.json'}", file=sys.stderr)
    return 0


def cmd_ingest(cfg) -> int:
    out = _out_dir(cfg)
    if not cfg.get("records"):
        raise NvarError("--records is required")
    records = ingest_mod.load_records(cfg["records"], lenient=bool(cfg["lenient"]))
    grid = ingest_mod.monthly_max_aggregate(records)
    sites, window = ingest_mod.select_complete_submatrix(grid)
    panel = ingest_mod.grid_to_panel(grid, sites, window)
    means = None
    if cfg["center"]:
        panel, means = ingest_mod.center_series(panel)
    panel.to_csv(out / "panel.csv")
    report = {
        "sites": list(sites),
        "p": panel.p,
        "n": panel.n,
        "window": [grid.month_label(window[0]), grid.month_label(window[1])],
        "centered": bool(cfg["center"]),
        "means": None if means is None else means.tolist(),
    }
    with open(out / "selection.json", "w") as fh:
        json.dump(report, fh, indent=2)
    print(f"selected p={panel.p} sites, n={panel.n} months "
          f"({report['window'][0]}..{report['window'][1]})", file=sys.stderr)
    print(f"wrote {out / 'panel.csv'} and {out / 'selection.json'}", file=sys.stderr)
    return 0


def cmd_distances(cfg) -> int:
    out = _out_dir(cfg)
    if cfg.get("adjacency"):
        layout = geometry.load_adjacency_csv(cfg["adjacency"])
        dist = geometry.graph_shortest_path_distances(layout)
    else:
        dist, _ = _load_distance_source(cfg)
    geometry.save_distance_csv(dist, out / "distances.csv")
    print(f"wrote {out / 'distances.csv'} (p={dist.p})", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nvar",
        description="Neighborhood vector autoregression toolkit",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--config", type=str)
    common.add_argument("--out-dir", dest="out_dir", type=str)

    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", parents=[common], help="generate a case model and panel")
    p_sim.add_argument("--case", type=int, choices=(1, 2, 3))
    p_sim.add_argument("--p", type=int)
    p_sim.add_argument("--d0", type=int)
    p_sim.add_argument("--sigma", type=float)
    p_sim.add_argument("--n", type=int)
    p_sim.add_argument("--burn-in", dest="burn_in", type=int)
    p_sim.add_argument("--init", choices=("zero", "unit"))

    p_fit = sub.add_parser("fit", parents=[common], help="fit NVAR / BVAR / lasso to a panel")
    p_fit.add_argument("--panel", type=str)
    p_fit.add_argument("--method", choices=("nvar", "bvar", "lasso"))
    p_fit.add_argument("--distances", type=str, help="square distance CSV, no header")
    p_fit.add_argument("--layout", type=str, help="layout CSV with header id,x,y[,z]")
    p_fit.add_argument("--lattice", choices=("1d", "2d"))
    p_fit.add_argument("--scale", type=str, help="euclidean distance scale or 'auto'")
    p_fit.add_argument("--q", type=int)
    p_fit.add_argument("--q-grid", dest="q_grid", type=str)
    p_fit.add_argument("--radii", type=str, help="comma-separated radii or 'auto'")
    p_fit.add_argument("--c-n", dest="c_n", type=float)
    p_fit.add_argument("--ordering", choices=baselines.ORDERING_KINDS)
    p_fit.add_argument("--prune", action="store_const", const=True)
    p_fit.add_argument("--train-fraction", dest="train_fraction", type=float)

    p_pred = sub.add_parser("predict", parents=[common], help="one-step MSPE on a held-out tail")
    p_pred.add_argument("--model", type=str, nargs="+")
    p_pred.add_argument("--panel", type=str)
    p_pred.add_argument("--split", type=float)
    p_pred.add_argument("--horizon", type=int)

    p_bench = sub.add_parser("bench", parents=[common], help="Monte Carlo benchmark grid")
    p_bench.add_argument("--case", type=str)
    p_bench.add_argument("--p", type=str)
    p_bench.add_argument("--d0", type=str)
    p_bench.add_argument("--sigma", type=str)
    p_bench.add_argument("--n", type=int)
    p_bench.add_argument("--reps", type=int)
    p_bench.add_argument("--methods", type=str)
    p_bench.add_argument("--radii", type=str)
    p_bench.add_argument("--c-n", dest="c_n", type=float)
    p_bench.add_argument("--burn-in", dest="burn_in", type=int)
    p_bench.add_argument("--init", choices=("zero", "unit"))
    p_bench.add_argument("--lasso-selection", dest="lasso_selection",
                         choices=("aic", "bic"))
    p_bench.add_argument("--lasso-c-n", dest="lasso_c_n", type=float)
    p_bench.add_argument("--trials-csv", dest="trials_csv", action="store_const", const=True)

    p_ing = sub.add_parser("ingest", parents=[common], help="records CSV -> complete panel")
    p_ing.add_argument("--records", type=str)
    p_ing.add_argument("--center", dest="center", action="store_const", const=True)
    p_ing.add_argument("--no-center", dest="center", action="store_const", const=False)
    p_ing.add_argument("--lenient", action="store_const", const=True)

    p_dist = sub.add_parser("distances", parents=[common], help="build a distance matrix CSV")
    p_dist.add_argument("--layout", type=str)
    p_dist.add_argument("--adjacency", type=str)
    p_dist.add_argument("--lattice", choices=("1d", "2d"))
    p_dist.add_argument("--p", type=int)
    p_dist.add_argument("--scale", type=str)

    return parser


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "predict": cmd_predict,
    "bench": cmd_bench,
    "ingest": cmd_ingest,
    "distances": cmd_distances,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _effective(args)
        return COMMANDS[args.command](cfg)
    except NvarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
