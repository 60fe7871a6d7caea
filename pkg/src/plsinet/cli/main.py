"""Command-line interface: simulate, fit, bootstrap, curve, mcstudy, predict.

Exit codes: 0 success, 2 argument error, 3 data error, 4 numerical
divergence, 5 inference failure.  The environment variable PLSI_SEED, when
set, overrides every seed argument.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .. import __version__, inference, mcstudy, simgen, trainer
from ..errors import (
    CheckpointError,
    DataError,
    DivergenceError,
    DomainError,
    FactorizationError,
    InferenceFailureError,
    NumericOverflowError,
    PlsinetError,
    ShapeError,
)
from ..model import ModelParams, apply_mean_link, index, link_values, predict_eta
from ..neural_link import ACTIVATIONS, MlpSpec
from ..numerics import RNG_ALGORITHM
from ..simgen import LINKS, SimScenario
from ..trainer import BETA_INITS, FitConfig
from . import figures, io

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_DIVERGED = 4
EXIT_INFERENCE = 5

EPILOG = f"""\
determinism:
  all randomness derives from the fixed generator {RNG_ALGORITHM};
  a given (command, seed) pair reproduces its outputs byte for byte.
  PLSI_SEED overrides --seed when set.

exit codes:
  0 success, 2 argument error, 3 data error, 4 numerical divergence,
  5 inference failure
"""


def _seed(args) -> int:
    env = os.environ.get("PLSI_SEED")
    return int(env) if env else int(args.seed)


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _add_config_flags(sp: argparse.ArgumentParser) -> None:
    g = sp.add_argument_group("model and optimizer")
    g.add_argument("--hidden", default="16,16", help="hidden layer widths, comma separated")
    g.add_argument("--activation", default="tanh", choices=ACTIVATIONS)
    g.add_argument("--epochs", type=int, default=500)
    g.add_argument("--batch-size", type=int, default=None, help="default: min(64, n)")
    g.add_argument("--learning-rate", type=float, default=1e-3)
    g.add_argument("--adam-betas", default="0.9,0.999")
    g.add_argument("--adam-eps", type=float, default=1e-8)
    g.add_argument("--anchoring-weight", type=float, default=1.0)
    g.add_argument("--index-centering-weight", type=float, default=0.0)
    g.add_argument("--patience", type=int, default=20, help="early stopping patience; 0 disables")
    g.add_argument("--val-fraction", type=float, default=0.1)
    g.add_argument("--beta-init", default="least_squares_direction", choices=BETA_INITS)
    g.add_argument("--no-flip-momentum", action="store_true",
                   help="do not flip Adam first moments when beta's sign flips")
    g.add_argument("--cox-minibatch", action="store_true",
                   help="risk sets within minibatches instead of full-batch cox gradients")
    g.add_argument("--seed", type=int, default=0)


def _fit_config(args, family: str, epochs: int | None = None) -> FitConfig:
    b1, b2 = (float(v) for v in _csv_list(args.adam_betas))
    return FitConfig(
        family=family,
        mlp=MlpSpec(hidden=tuple(int(h) for h in _csv_list(args.hidden)),
                    activation=args.activation),
        epochs=epochs if epochs is not None else args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        adam_betas=(b1, b2),
        adam_eps=args.adam_eps,
        anchoring_weight=args.anchoring_weight,
        index_centering_weight=args.index_centering_weight,
        early_stop_patience=args.patience,
        validation_fraction=args.val_fraction,
        seed=_seed(args),
        flip_momentum=not args.no_flip_momentum,
        beta_init=args.beta_init,
        cox_minibatch=args.cox_minibatch,
    )


def _add_data_flags(sp: argparse.ArgumentParser) -> None:
    g = sp.add_argument_group("data")
    g.add_argument("--data", required=True, help="delimited input file with a header row")
    g.add_argument("--delimiter", default=",")
    g.add_argument("--family", required=True, choices=("gaussian", "binomial", "poisson", "cox"))
    g.add_argument("--exposures", required=True, help="exposure column names, comma separated")
    g.add_argument("--covariates", default="", help="covariate column names, comma separated")
    g.add_argument("--outcome", default=None, help="response column (gaussian/binomial/poisson)")
    g.add_argument("--time", default=None, help="survival time column (cox)")
    g.add_argument("--event", default=None, help="event indicator column (cox)")
    g.add_argument("--weights", default=None, help="optional case-weight column")
    g.add_argument("--no-standardize", action="store_true",
                   help="fit exposures on their raw scale")
    g.add_argument("--no-intercept", action="store_true",
                   help="do not prepend an intercept column to the covariates")


def _load_dataset(args):
    _, columns = io.load_columns(args.data, delimiter=args.delimiter)
    data, z_names = io.build_dataset(
        args.data,
        columns,
        family=args.family,
        exposures=_csv_list(args.exposures),
        covariates=_csv_list(args.covariates),
        outcome=args.outcome,
        time_col=args.time,
        event_col=args.event,
        weights_col=args.weights,
        add_intercept=not args.no_intercept,
    )
    return data, z_names


def _sidecar_metadata(data_path: str) -> dict | None:
    """Scenario sidecar written by `simulate`, when fitting simulated data."""
    side = Path(data_path).with_suffix(".metadata.json")
    if not side.exists():
        side = Path(data_path).parent / "metadata.json"
    if side.exists():
        try:
            return json.loads(side.read_text())
        except json.JSONDecodeError:
            return None
    return None


def _coefficient_rows(params: ModelParams, exposure_names, covariate_names) -> list[dict]:
    rows = []
    for name, value in zip(exposure_names, params.beta):
        rows.append({"parameter": name, "role": "exposure_index", "estimate": repr(float(value))})
    for name, value in zip(covariate_names, params.gamma):
        rows.append({"parameter": name, "role": "covariate", "estimate": repr(float(value))})
    return rows


def _coefficient_text(rows: list[dict], extra_cols: list[str] = ()) -> str:
    width = max(len(r["parameter"]) for r in rows) + 2
    cols = ["estimate", *extra_cols]
    head = f"{'parameter':<{width}}{'role':<16}" + "".join(f"{c:>14}" for c in cols)
    lines = [head]
    for r in rows:
        line = f"{r['parameter']:<{width}}{r['role']:<16}"
        for c in cols:
            line += f"{float(r[c]):>14.4f}" if r[c] != "" else " " * 14
        lines.append(line)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- simulate

def cmd_simulate(args) -> int:
    started = time.time()
    out = _out_dir(args)
    seed = _seed(args)
    scenario = SimScenario(
        link=args.link,
        family=args.family,
        n=args.n,
        rho=args.rho,
        beta_true=simgen.true_beta(paper_literal_norm=args.paper_literal_norm),
        seed=seed,
    )
    data = simgen.generate(scenario)
    p = data.p
    names = [f"x{j + 1}" for j in range(p)] + [f"z{k + 1}" for k in range(3)]
    cols = [data.x[:, j] for j in range(p)]
    # drop the generated intercept column from the emitted covariates
    z = data.z[:, 1:] if args.family != "cox" else data.z
    cols += [z[:, k] for k in range(z.shape[1])]
    if args.family == "cox":
        names += ["time", "event"]
        cols += [data.time, data.event]
    else:
        names += ["y"]
        cols += [data.y]
    rows = [
        {n: repr(float(c[i])) for n, c in zip(names, cols)}
        for i in range(data.n)
    ]
    io.write_delimited(out / "data.csv", names, rows)
    metadata = {
        "link": args.link,
        "family": args.family,
        "n": args.n,
        "rho": args.rho,
        "seed": seed,
        "beta_true": [float(v) for v in scenario.beta_true],
        "gamma_true": [float(v) for v in scenario.gamma_true],
        "paper_literal_norm": bool(args.paper_literal_norm),
        "censor_upper": simgen.DEFAULT_CENSOR_UPPER.get(args.link) if args.family == "cox" else None,
        "conventions": (
            ["synthetic-convention"] if args.family in ("binomial", "cox") else []
        ),
    }
    (out / "metadata.json").write_text(json.dumps(metadata, sort_keys=True, indent=2) + "\n")
    io.write_manifest(
        out, "simulate", {k: v for k, v in vars(args).items() if k != "func"},
        {"seed": seed}, [], ["data.csv", "metadata.json"], started,
    )
    print(f"wrote {out / 'data.csv'} ({data.n} rows, family={args.family}, link={args.link})")
    return EXIT_OK


# --------------------------------------------------------------------- fit

def _fit_once(args, data, z_names):
    """Shared by fit/bootstrap: standardization + optional warm start."""
    warm = None
    standardize = None
    if getattr(args, "warm_start", None):
        warm, header = io.read_checkpoint(args.warm_start)
        stored = io.checkpoint_standardization(header, args.warm_start)
        if stored is not None:
            mean, sd = stored
            data = replace_x(data, (data.x - mean) / sd)
            standardize = {"mean": mean, "sd": sd}
    elif not args.no_standardize:
        x_std, mean, sd = io.standardize_exposures(data.x, _csv_list(args.exposures))
        data = replace_x(data, x_std)
        standardize = {"mean": mean, "sd": sd}
    epochs = args.epochs
    if warm is not None and epochs == 0:
        return data, warm, standardize, None
    if epochs == 0:
        raise DataError("--epochs 0 is only meaningful together with --warm-start")
    config = _fit_config(args, args.family)
    callback = None
    if getattr(args, "verbose", False):
        def callback(epoch, train_loss, val_loss):
            msg = f"epoch {epoch:4d}  train {train_loss:.6f}"
            if val_loss is not None:
                msg += f"  val {val_loss:.6f}"
            print(msg, file=sys.stderr)
    result = trainer.fit(data, config, init=warm, callback=callback)
    return data, result.params, standardize, result


def replace_x(data, x_new):
    from dataclasses import replace as _r

    return _r(data, x=x_new)


def cmd_fit(args) -> int:
    started = time.time()
    out = _out_dir(args)
    data, z_names = _load_dataset(args)
    data, params, standardize, result = _fit_once(args, data, z_names)
    exposure_names = _csv_list(args.exposures)
    outcome_meta = (
        {"time": args.time, "event": args.event}
        if args.family == "cox"
        else {"y": args.outcome}
    )
    io.write_checkpoint(
        out / "model.ckpt", params, args.family, exposure_names, z_names,
        outcome_meta, standardize,
    )
    rows = _coefficient_rows(params, exposure_names, z_names)
    io.write_delimited(out / "coefficients.csv", ["parameter", "role", "estimate"], rows)
    io.write_text(out / "coefficients.txt", _coefficient_text(rows))
    config_snapshot = {k: v for k, v in vars(args).items() if k != "func"}
    if result is not None:
        config_snapshot["epochs_run"] = result.stopped_epoch
        config_snapshot["final_train_loss"] = float(result.loss_history[-1])
        config_snapshot["sign_flips"] = result.flips
    io.write_manifest(
        out, "fit", config_snapshot, {"seed": _seed(args)}, [args.data],
        ["model.ckpt", "coefficients.csv", "coefficients.txt"], started,
    )
    print(f"fitted {args.family} model on {data.n} rows; artifacts in {out}")
    return EXIT_OK


# --------------------------------------------------------------- bootstrap

def cmd_bootstrap(args) -> int:
    started = time.time()
    out = _out_dir(args)
    data, z_names = _load_dataset(args)
    data, point, standardize, _ = _fit_once(args, data, z_names)
    config = _fit_config(args, args.family)
    boot = inference.bootstrap(
        data, config, B=args.B, alpha=args.alpha, seed=_seed(args),
        warm_start=args.warm_start_replicates, jobs=args.jobs, point=point,
    )
    exposure_names = _csv_list(args.exposures)
    names = exposure_names + z_names
    est = boot.point_vector
    rows = []
    for i, name in enumerate(names):
        rows.append(
            {
                "parameter": name,
                "role": "exposure_index" if i < len(exposure_names) else "covariate",
                "estimate": repr(float(est[i])),
                "se": repr(float(boot.se[i])),
                "ci_normal_lo": repr(float(boot.ci_normal[i, 0])),
                "ci_normal_hi": repr(float(boot.ci_normal[i, 1])),
                "ci_pct_lo": repr(float(boot.ci_percentile[i, 0])),
                "ci_pct_hi": repr(float(boot.ci_percentile[i, 1])),
            }
        )
    fields = ["parameter", "role", "estimate", "se", "ci_normal_lo", "ci_normal_hi",
              "ci_pct_lo", "ci_pct_hi"]
    io.write_delimited(out / "coefficients.csv", fields, rows)
    io.write_text(out / "coefficients.txt", _coefficient_text(rows, fields[3:]))

    rep_fields = ["replicate"] + names
    rep_rows = [
        {"replicate": b, **{n: repr(float(v)) for n, v in zip(names, boot.replicates[b])}}
        for b in range(boot.replicates.shape[0])
    ]
    io.write_delimited(out / "replicates.csv", rep_fields, rep_rows)
    np.save(out / "replicate_thetas.npy",
            np.stack([m.theta for m in boot.replicate_params]))

    outcome_meta = (
        {"time": args.time, "event": args.event}
        if args.family == "cox"
        else {"y": args.outcome}
    )
    io.write_checkpoint(
        out / "model.ckpt", point, args.family, exposure_names, z_names,
        outcome_meta, standardize,
    )
    s_fit = index(point, data.x)
    sidecar = _sidecar_metadata(args.data)
    band_meta = {
        "alpha": args.alpha,
        "B_requested": boot.requested,
        "B_dropped": boot.dropped,
        "index_quantiles": {
            "lo": float(np.quantile(s_fit, 0.005)),
            "hi": float(np.quantile(s_fit, 0.995)),
        },
        "mlp": {"hidden": list(point.mlp.hidden), "activation": point.mlp.activation},
        "true_link": sidecar.get("link") if sidecar else None,
        "standardized": standardize is not None,
    }
    (out / "band_sources.json").write_text(json.dumps(band_meta, sort_keys=True, indent=2) + "\n")
    figures.forest_figure(
        out / "coefficients.png", names, est, boot.ci_normal[:, 0], boot.ci_normal[:, 1],
        alpha=args.alpha,
    )
    io.write_manifest(
        out, "bootstrap", {k: v for k, v in vars(args).items() if k != "func"},
        {"seed": _seed(args)}, [args.data],
        ["coefficients.csv", "coefficients.txt", "coefficients.png", "replicates.csv",
         "replicate_thetas.npy", "model.ckpt", "band_sources.json"], started,
    )
    kept = boot.requested - boot.dropped
    print(f"bootstrap done: {kept}/{boot.requested} replicates kept; artifacts in {out}")
    return EXIT_OK


# ------------------------------------------------------------------- curve

def cmd_curve(args) -> int:
    started = time.time()
    src = Path(args.bootstrap)
    needed = ["model.ckpt", "replicate_thetas.npy", "band_sources.json"]
    missing = [n for n in needed if not (src / n).exists()]
    if missing:
        raise DataError(
            f"bootstrap artifacts missing from {src} ({missing}); "
            "run `plsinet bootstrap` first and pass its output directory"
        )
    out = _out_dir(args)
    point, header = io.read_checkpoint(src / "model.ckpt")
    meta = json.loads((src / "band_sources.json").read_text())
    thetas = np.load(src / "replicate_thetas.npy")
    lo_s = args.grid_min if args.grid_min is not None else meta["index_quantiles"]["lo"]
    hi_s = args.grid_max if args.grid_max is not None else meta["index_quantiles"]["hi"]
    if not lo_s < hi_s:
        raise DomainError(f"empty curve grid: [{lo_s}, {hi_s}]")
    grid = np.linspace(lo_s, hi_s, args.grid_points)
    spec = point.mlp
    replicate_models = [
        ModelParams(beta=point.beta, gamma=point.gamma, theta=thetas[b], mlp=spec)
        for b in range(thetas.shape[0])
    ]
    alpha = meta["alpha"]
    band = inference.curve_band(replicate_models, grid, alpha)
    g_point = link_values(point, grid)
    true_link = meta.get("true_link")
    g_true = simgen.eval_true_link(true_link, grid) if true_link else None

    fields = ["s", "g_mean", "g_lo", "g_hi", "g_point"] + (["g_true"] if g_true is not None else [])
    rows = []
    for i in range(grid.size):
        row = {
            "s": repr(float(grid[i])),
            "g_mean": repr(float(band.mean[i])),
            "g_lo": repr(float(band.lo[i])),
            "g_hi": repr(float(band.hi[i])),
            "g_point": repr(float(g_point[i])),
        }
        if g_true is not None:
            row["g_true"] = repr(float(g_true[i]))
        rows.append(row)
    io.write_delimited(out / "curve.csv", fields, rows)
    outputs = ["curve.csv"]
    if not args.no_figure:
        figures.curve_figure(
            out / "curve.png", grid, band.mean, band.lo, band.hi,
            point=g_point, true=g_true, alpha=alpha,
        )
        outputs.append("curve.png")
    io.write_manifest(
        out, "curve", {k: v for k, v in vars(args).items() if k != "func"},
        {}, [src / n for n in needed], outputs, started,
    )
    print(f"curve band over [{lo_s:.4f}, {hi_s:.4f}] written to {out}")
    return EXIT_OK


# ----------------------------------------------------------------- mcstudy

def cmd_mcstudy(args) -> int:
    started = time.time()
    out = _out_dir(args)
    seed = _seed(args)
    grid_conf = {}
    if args.grid:
        grid_conf = json.loads(Path(args.grid).read_text())
    links = grid_conf.get("links", list(LINKS))
    families = grid_conf.get("families", ["gaussian"])
    sizes = grid_conf.get("sizes", [500, 2000])
    R = args.R if args.R is not None else grid_conf.get("R", 50)
    B = args.B if args.B is not None else grid_conf.get("B", 100)
    rho = grid_conf.get("rho", 0.3)
    cells = [(lk, fam, n) for lk in links for fam in families for n in sizes]
    if args.cell:
        parts = _csv_list(args.cell)
        if len(parts) != 3:
            raise DataError("--cell expects 'link,family,n'")
        cells = [(parts[0], parts[1], int(parts[2]))]
    outputs = []
    for link, family, n in cells:
        scenario = SimScenario(link=link, family=family, n=n, rho=rho, seed=seed)
        config = _fit_config(args, family)
        table, records = mcstudy.run_cell(scenario, R=R, B=B, config=config,
                                          seed=seed, jobs=args.jobs)
        stem = f"{link}_{family}_{n}"
        io.write_text(out / f"metrics_{stem}.txt", mcstudy.format_table(table))
        io.write_delimited(
            out / f"metrics_{stem}.csv",
            ["parameter", "true", "bias", "sd", "se_mean", "cp", "cp_percentile"],
            mcstudy.table_rows(table),
        )
        io.write_delimited(
            out / f"replicates_{stem}.csv",
            ["replicate", "parameter", "estimate", "se", "ci_normal_lo",
             "ci_normal_hi", "ci_pct_lo", "ci_pct_hi"],
            mcstudy.replicate_rows(records),
        )
        outputs += [f"metrics_{stem}.txt", f"metrics_{stem}.csv", f"replicates_{stem}.csv"]
        print(f"cell {stem}: R={R} B={B} done")
    io.write_manifest(
        out, "mcstudy", {k: v for k, v in vars(args).items() if k != "func"},
        {"seed": seed}, [args.grid] if args.grid else [], outputs, started,
    )
    return EXIT_OK


# ----------------------------------------------------------------- predict

def cmd_predict(args) -> int:
    started = time.time()
    out = _out_dir(args)
    params, header = io.read_checkpoint(args.checkpoint)
    _, columns = io.load_columns(args.data, delimiter=args.delimiter)
    x = np.column_stack([_require_col(columns, n, args.data) for n in header["exposure_names"]])
    z_cols = []
    for name in header["covariate_names"]:
        if name == io.INTERCEPT_NAME:
            z_cols.append(np.ones(x.shape[0]))
        else:
            z_cols.append(_require_col(columns, name, args.data))
    z = np.column_stack(z_cols) if z_cols else np.empty((x.shape[0], 0))
    stored = io.checkpoint_standardization(header, args.checkpoint)
    if stored is not None:
        mean, sd = stored
        x = (x - mean) / sd
    eta = predict_eta(params, x, z)
    family = header["family"]
    fields = ["row", "eta"]
    rows = [{"row": i, "eta": repr(float(eta[i]))} for i in range(eta.size)]
    if family == "cox":
        fields.append("relative_hazard")
        for i, row in enumerate(rows):
            row["relative_hazard"] = repr(float(np.exp(eta[i])))
    else:
        mu = apply_mean_link(family, eta)
        fields.append("mean")
        for i, row in enumerate(rows):
            row["mean"] = repr(float(mu[i]))
    io.write_delimited(out / "predictions.csv", fields, rows)
    io.write_manifest(
        out, "predict", {k: v for k, v in vars(args).items() if k != "func"},
        {}, [args.checkpoint, args.data], ["predictions.csv"], started,
    )
    print(f"wrote predictions for {eta.size} rows to {out / 'predictions.csv'}")
    return EXIT_OK


def _require_col(columns: dict, name: str, path) -> np.ndarray:
    if name not in columns:
        raise DataError(f"{path}: column {name!r} (required by the checkpoint) is missing")
    return columns[name]


# -------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plsinet",
        description="Partial-linear single-index regression with a neural link",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"plsinet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="generate a synthetic dataset")
    sp.add_argument("--link", default="linear", choices=LINKS)
    sp.add_argument("--family", default="gaussian", choices=("gaussian", "binomial", "cox"))
    sp.add_argument("--n", type=int, default=2000)
    sp.add_argument("--rho", type=float, default=0.3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--paper-literal-norm", action="store_true",
                    help="normalize the true index direction by sqrt(1.84) instead of "
                         "the full Euclidean norm sqrt(2.09) (direction is then not unit length)")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("fit", help="fit the model on a delimited file")
    _add_data_flags(sp)
    _add_config_flags(sp)
    sp.add_argument("--warm-start", default=None, help="checkpoint to start from")
    sp.add_argument("--verbose", action="store_true")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("bootstrap", help="bootstrap SEs, CIs, and band sources")
    _add_data_flags(sp)
    _add_config_flags(sp)
    sp.add_argument("--warm-start", default=None, help="checkpoint for the point fit")
    sp.add_argument("--B", type=int, default=100, help="bootstrap replicates")
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--warm-start-replicates", action="store_true",
                    help="start replicate fits at the point estimate (faster, "
                         "understates spread)")
    sp.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    sp.add_argument("--verbose", action="store_true")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_bootstrap)

    sp = sub.add_parser("curve", help="link-curve grid with confidence band")
    sp.add_argument("--bootstrap", required=True, help="output directory of `plsinet bootstrap`")
    sp.add_argument("--grid-min", type=float, default=None)
    sp.add_argument("--grid-max", type=float, default=None)
    sp.add_argument("--grid-points", type=int, default=201)
    sp.add_argument("--no-figure", action="store_true")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_curve)

    sp = sub.add_parser("mcstudy", help="Monte-Carlo metric tables over a scenario grid")
    sp.add_argument("--grid", default=None, help="JSON grid config")
    sp.add_argument("--cell", default=None, help="single cell 'link,family,n'")
    sp.add_argument("--R", type=int, default=None, help="dataset replicates (default 50)")
    sp.add_argument("--B", type=int, default=None, help="bootstrap samples (default 100)")
    sp.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    _add_config_flags(sp)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_mcstudy)

    sp = sub.add_parser("predict", help="apply a fitted checkpoint to new data")
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--data", required=True)
    sp.add_argument("--delimiter", default=",")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_predict)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except (DivergenceError, NumericOverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except InferenceFailureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFERENCE
    except (DataError, DomainError, ShapeError, CheckpointError, FactorizationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except PlsinetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
