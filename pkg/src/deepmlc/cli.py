"""Command-line entry point.

Subcommands: inspect, train, eval, sweep, reproduce. Results go to stdout
or files; progress lines go to stderr as machine-parsable key=value pairs.
Exit codes are a stable contract: 0 success, 1 internal error, 2
input/file error, 3 validation/dimension error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .data import load_arff, load_csv, stats
from .errors import (ConfigError, DeepMlcError, DimensionMismatch, ParseError,
                     UnsupportedAttributeError, ValidationError)
from .harness import (CLI_TRAIN_METHODS, REDUCED_GRID, GridSpec, MethodConfig,
                      load_bundle, save_bundle, sweep_hidden_units,
                      sweep_rows_to_csv, train_pipeline)
from .metrics import evaluate_predictions
from .reference import TABLES
from .reproduce import reproduce_rows_to_csv, reproduce_table
from .util import derive_seed

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2
EXIT_VALIDATION = 3


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _progress(quiet):
    if quiet:
        return None

    def emit(**kv):
        print(" ".join(f"{k}={_fmt(v)}" for k, v in kv.items()), file=sys.stderr)

    return emit


def _load_dataset(args):
    fmt = args.format
    if fmt is None:
        fmt = "csv" if args.dataset.lower().endswith(".csv") else "arff"
    if fmt == "csv":
        if args.labels is None:
            raise ConfigError("--labels is required for csv datasets")
        return load_csv(args.dataset, args.labels, labels_first=not args.labels_last)
    return load_arff(args.dataset, label_count=args.labels)


def _add_dataset_args(p):
    p.add_argument("--dataset", required=True, help="path to the dataset file")
    p.add_argument("--format", choices=("arff", "csv"),
                   help="dataset format (default: by file extension)")
    p.add_argument("--labels", type=int,
                   help="label count; optional for ARFF files with a -C token")
    p.add_argument("--labels-last", action="store_true",
                   help="CSV label columns are at the end instead of the front")


def _method_config_from_args(args, n_features) -> MethodConfig:
    kwargs = {"method": args.method, "threshold": args.threshold}
    if args.hidden_units is not None:
        kwargs["n_hidden"] = args.hidden_units
    for attr, key in (("eta", "learning_rate"), ("alpha", "momentum"),
                      ("rbm_epochs", "rbm_epochs"), ("cd_steps", "cd_steps"),
                      ("batch_size", "batch_size"), ("chains", "n_chains"),
                      ("rakel_k", "subset_size"), ("rakel_m", "ensemble_size"),
                      ("bp_epochs", "bp_epochs"), ("bp_rate", "bp_learning_rate")):
        value = getattr(args, attr, None)
        if value is not None:
            kwargs[key] = value
    return MethodConfig(**kwargs)


def cmd_inspect(args) -> int:
    ds = _load_dataset(args)
    st = stats(ds)
    print(f"N={st.n_instances} L={st.n_labels} d={st.n_features} "
          f"LC={st.label_cardinality:.2f}")
    return EXIT_OK


def cmd_train(args) -> int:
    if args.method not in CLI_TRAIN_METHODS:
        print(f"error: unknown method {args.method!r}; choose from "
              f"{', '.join(CLI_TRAIN_METHODS)}", file=sys.stderr)
        return EXIT_INPUT
    ds = _load_dataset(args)
    cfg = _method_config_from_args(args, ds.n_features)
    pipe = train_pipeline(ds, cfg, derive_seed(args.seed, "train", args.method),
                          jobs=args.jobs, progress=_progress(args.quiet))
    save_bundle(pipe, args.out)
    print(f"wrote bundle to {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    pipe = load_bundle(args.model)
    ds = _load_dataset(args)
    metrics = evaluate_predictions(ds.labels, pipe.predict(ds.features))
    print(f"accuracy={metrics.accuracy!r} hamming_loss={metrics.hamming_loss!r} "
          f"exact_match={metrics.exact_match!r} n_test={metrics.n_test}")
    out = args.out or os.path.join(args.model, "metrics.json")
    payload = {"metrics": metrics.to_json_dict(), "model": args.model,
               "dataset": args.dataset, "method": pipe.method, "seed": pipe.seed}
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    ds = _load_dataset(args)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    u_list = [int(u) for u in args.units.split(",") if u.strip()]
    rows = sweep_hidden_units(
        ds, methods, u_list, args.seed, eta=args.eta, alpha=args.alpha,
        rbm_epochs=args.rbm_epochs, n_chains=args.chains,
        threshold=args.threshold, jobs=args.jobs, progress=_progress(args.quiet))
    csv_text = sweep_rows_to_csv(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    return EXIT_OK


def _grid_from_arg(value):
    if value == "reduced":
        return REDUCED_GRID
    if value == "default":
        return GridSpec()
    with open(value, encoding="utf-8") as fh:
        d = json.load(fh)
    return GridSpec(u_values=tuple(d.get("u_values", GridSpec.u_values)),
                    eta_values=tuple(d.get("eta_values", GridSpec.eta_values)),
                    alpha_values=tuple(d.get("alpha_values", GridSpec.alpha_values)),
                    folds=int(d.get("folds", 3)))


def cmd_reproduce(args) -> int:
    overrides = {}
    for attr, key in (("rbm_epochs", "rbm_epochs"), ("chains", "n_chains"),
                      ("bp_epochs", "bp_epochs"), ("hidden_units", "n_hidden")):
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = value
    datasets = None
    if args.datasets:
        datasets = [d.strip().lower() for d in args.datasets.split(",") if d.strip()]
    rows = reproduce_table(args.table, args.data_dir, seed=args.seed,
                           grid=_grid_from_arg(args.grid), jobs=args.jobs,
                           overrides=overrides, datasets=datasets,
                           progress=_progress(args.quiet))
    csv_text = reproduce_rows_to_csv(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deepmlc",
        description="Multi-label classification with RBM/DBN feature learning")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("inspect", help="print dataset statistics")
    _add_dataset_args(p)
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("train", help="train a model and write a bundle directory")
    _add_dataset_args(p)
    p.add_argument("--method", required=True,
                   help=f"one of {', '.join(CLI_TRAIN_METHODS)}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="bundle output directory")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--hidden-units", type=int, dest="hidden_units",
                   help="RBM width; default is ceil(d/5)")
    p.add_argument("--eta", type=float, help="RBM learning rate (default 0.1)")
    p.add_argument("--alpha", type=float, help="RBM momentum (default 0.8)")
    p.add_argument("--rbm-epochs", type=int, dest="rbm_epochs")
    p.add_argument("--cd-steps", type=int, dest="cd_steps")
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--chains", type=int, help="ECC ensemble size (default 50)")
    p.add_argument("--rakel-k", type=int, dest="rakel_k")
    p.add_argument("--rakel-m", type=int, dest="rakel_m")
    p.add_argument("--bp-epochs", type=int, dest="bp_epochs")
    p.add_argument("--bp-rate", type=float, dest="bp_rate")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--quiet", action="store_true", help="suppress progress lines")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained bundle on a dataset")
    p.add_argument("--model", required=True, help="bundle directory")
    _add_dataset_args(p)
    p.add_argument("--out", help="metrics JSON path (default <bundle>/metrics.json)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="accuracy vs hidden-unit count, CSV out")
    _add_dataset_args(p)
    p.add_argument("--methods", default="br,cc",
                   help="comma-separated base methods to compare (default br,cc)")
    p.add_argument("--units", default="30,60,120,240",
                   help="comma-separated hidden unit counts")
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--rbm-epochs", type=int, dest="rbm_epochs", default=1000)
    p.add_argument("--chains", type=int, default=50)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("reproduce",
                       help="measure a published comparison table on local data")
    p.add_argument("--table", required=True, choices=tuple(TABLES),
                   help="table id")
    p.add_argument("--data-dir", required=True, dest="data_dir",
                   help="directory of <name>.arff dataset files")
    p.add_argument("--datasets", help="comma-separated subset of dataset rows")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--grid", default="reduced",
                   help="'reduced', 'default', or a JSON grid file (default reduced)")
    p.add_argument("--rbm-epochs", type=int, dest="rbm_epochs",
                   help="override RBM epochs for desk-scale runs")
    p.add_argument("--chains", type=int, help="override ECC ensemble size")
    p.add_argument("--bp-epochs", type=int, dest="bp_epochs")
    p.add_argument("--hidden-units", type=int, dest="hidden_units")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (ParseError, UnsupportedAttributeError, ConfigError, FileNotFoundError,
            IsADirectoryError, NotADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValidationError, DimensionMismatch, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DeepMlcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
