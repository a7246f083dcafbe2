"""Experiment orchestration: method dispatch, cross-validated grid search
over RBM hyperparameters, end-to-end experiment runs, hidden-unit sweeps,
and model bundle persistence.

The pipeline for every method is scale -> (optional RBM/DBN feature
learning) -> transformation -> threshold. Scaling parameters are always
fit on training data only and applied, clamped, to test data. All
randomness flows from one master seed through named derivation, so worker
counts never change results.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .data import Dataset, ScalingParams, SplitSpec, load_arff, load_csv, scale_features, split, stats
from .dbn import BpHyper, attach_and_finetune, bpmll_baseline, greedy_pretrain, load_stack, save_stack
from .errors import ConfigError, DeepMlcError, DimensionMismatch, TrainingError
from .metrics import MetricSet, accuracy, evaluate_predictions
from .rbm import Rbm, RbmHyper, cd_train, load_rbm, save_rbm, transform as rbm_transform
from .transforms import (BaseConfig, DbnLabelModel, FeatureStackModel, fit_br, fit_cc,
                         fit_ecc, fit_fw, fit_lp, fit_rakel, model_from_json_dict,
                         model_to_json_dict, wrap_with_features)
from .util import derive_seed, parallel_map

RAW_METHODS = ("br", "cc", "ecc", "lp", "rakel", "fw")
WRAPPED_METHODS = ("br_r", "cc_r", "ecc_r", "lp_r", "rak_r", "fw_r")
DBN_METHODS = ("dbn2_ecc", "dbn3_bp", "bpnn")
ALL_METHODS = RAW_METHODS + WRAPPED_METHODS + DBN_METHODS

# Methods the train subcommand accepts (its documented contract).
CLI_TRAIN_METHODS = ("br", "cc", "ecc", "lp", "rakel", "fw", "ecc_r", "rak_r",
                     "fw_r", "dbn2_ecc", "dbn3_bp", "bpnn")

_WRAPPED_TO_RAW = {"br_r": "br", "cc_r": "cc", "ecc_r": "ecc", "lp_r": "lp",
                   "rak_r": "rakel", "fw_r": "fw"}


@dataclass(frozen=True)
class MethodConfig:
    """Everything needed to train one method end to end.

    RBM fields apply to the *_r wrappers and the DBN variants; chain and
    subset fields apply to the ensembles; bp fields to the fine-tuned and
    random-init networks.
    """

    method: str
    threshold: float = 0.5
    base: BaseConfig = field(default_factory=BaseConfig)
    n_chains: int = 50
    subset_size: int = 3
    ensemble_size: int = 0          # 0 means the 2L default
    n_hidden: int = 0               # 0 means ceil(d/5)
    learning_rate: float = 0.1
    momentum: float = 0.8
    rbm_epochs: int = 1000
    cd_steps: int = 1
    batch_size: int = 100
    weight_cost: float = 2e-5
    bp_epochs: int = 100
    bp_learning_rate: float = 0.1

    def __post_init__(self):
        if self.method not in ALL_METHODS:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {ALL_METHODS}")

    def to_json_dict(self):
        return asdict(self)

    @classmethod
    def from_json_dict(cls, d):
        d = dict(d)
        base = d.pop("base", None)
        cfg = cls(**d) if base is None else cls(base=BaseConfig(**base), **d)
        return cfg


def uses_rbm_grid(method: str) -> bool:
    """Only the *_r wrappers take their RBM hyperparameters from the grid;
    the DBN variants use the fixed width-d/5 recipe."""
    return method in WRAPPED_METHODS


def _hidden_width(cfg: MethodConfig, d: int) -> int:
    return cfg.n_hidden if cfg.n_hidden > 0 else max(1, math.ceil(d / 5))


def _rbm_hyper(cfg: MethodConfig, d: int) -> RbmHyper:
    return RbmHyper(n_hidden=_hidden_width(cfg, d), learning_rate=cfg.learning_rate,
                    momentum=cfg.momentum, weight_cost=cfg.weight_cost,
                    epochs=cfg.rbm_epochs, cd_steps=cfg.cd_steps,
                    batch_size=cfg.batch_size)


def _bp_hyper(cfg: MethodConfig) -> BpHyper:
    return BpHyper(bp_epochs=cfg.bp_epochs, bp_learning_rate=cfg.bp_learning_rate,
                   threshold=cfg.threshold)


def _fit_raw(name, ds, cfg: MethodConfig, seed, jobs=1):
    base, t = cfg.base, cfg.threshold
    if name == "br":
        return fit_br(ds, base=base, seed=seed, threshold=t, jobs=jobs)
    if name == "cc":
        return fit_cc(ds, range(ds.n_labels), base=base, seed=seed, threshold=t)
    if name == "ecc":
        return fit_ecc(ds, n_chains=cfg.n_chains, base=base, seed=seed, threshold=t, jobs=jobs)
    if name == "lp":
        return fit_lp(ds, base=base, seed=seed)
    if name == "rakel":
        m = cfg.ensemble_size if cfg.ensemble_size > 0 else 2 * ds.n_labels
        return fit_rakel(ds, k=cfg.subset_size, m=m, base=base, seed=seed, threshold=t,
                         jobs=jobs)
    if name == "fw":
        return fit_fw(ds, base=base, seed=seed, threshold=t, jobs=jobs)
    raise ConfigError(f"unknown base method {name!r}")


def fit_method(train: Dataset, cfg: MethodConfig, seed, jobs=1, progress=None):
    """Train one method on an already-scaled training set."""
    method = cfg.method
    if method in RAW_METHODS:
        return _fit_raw(method, train, cfg, derive_seed(seed, "fit", method), jobs)

    if method in WRAPPED_METHODS:
        hyper = _rbm_hyper(cfg, train.n_features)
        extractor, _ = cd_train(train.features, hyper, derive_seed(seed, "rbm"),
                                progress=progress)
        inner_name = _WRAPPED_TO_RAW[method]
        wrapped = wrap_with_features(
            lambda ds, **kw: _fit_raw(inner_name, ds, cfg,
                                      derive_seed(seed, "fit", inner_name), jobs),
            extractor)
        return wrapped(train)

    width = _hidden_width(cfg, train.n_features)
    if method == "dbn2_ecc":
        stack = greedy_pretrain(train.features, [width, width], _rbm_hyper(cfg, train.n_features),
                                derive_seed(seed, "dbn"), progress=progress)
        wrapped = wrap_with_features(
            lambda ds, **kw: _fit_raw("ecc", ds, cfg, derive_seed(seed, "fit", "ecc"), jobs),
            stack)
        return wrapped(train)
    if method == "dbn3_bp":
        stack = greedy_pretrain(train.features, [width, width], _rbm_hyper(cfg, train.n_features),
                                derive_seed(seed, "dbn"), progress=progress)
        tuned = attach_and_finetune(stack, train, _bp_hyper(cfg), derive_seed(seed, "bp"))
        return DbnLabelModel(tuned, cfg.threshold)
    if method == "bpnn":
        tuned = bpmll_baseline(train, [width, width], _bp_hyper(cfg), derive_seed(seed, "bp"))
        return DbnLabelModel(tuned, cfg.threshold)
    raise ConfigError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Grid search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """The hyperparameter grid searched with k-fold CV."""

    u_values: tuple = (30, 60, 120, 240)
    eta_values: tuple = (0.1, 0.01, 0.001)
    alpha_values: tuple = (0.2, 0.4, 0.8)
    folds: int = 3

    def __post_init__(self):
        if not (self.u_values and self.eta_values and self.alpha_values):
            raise ValueError("grid value lists must be non-empty")
        if self.folds < 2:
            raise ValueError("grid folds must be >= 2")

    def cells(self):
        return [(u, e, a) for u in self.u_values for e in self.eta_values
                for a in self.alpha_values]


REDUCED_GRID = GridSpec(u_values=(60, 120), eta_values=(0.1,), alpha_values=(0.8,))


@dataclass
class GridResult:
    chosen: dict
    table: list
    fold_hash: str
    folds: int


def _content_hash(ds: Dataset) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(ds.features).tobytes())
    h.update(np.ascontiguousarray(ds.labels).tobytes())
    return h.hexdigest()[:16]


def grid_search(ds_train: Dataset, cfg: MethodConfig, grid: GridSpec, seed,
                jobs=1, progress=None) -> GridResult:
    """k-fold CV over the grid for the full scale -> RBM -> method pipeline.

    The fold partition is computed once and shared by every cell, and its
    content hash is recorded so reports can prove no cell saw a different
    split. Failed cells are recorded and skipped. Ties break toward
    smaller u, then larger eta, then smaller alpha.
    """
    if ds_train.n_instances < grid.folds:
        raise ValueError(f"grid search needs N >= {grid.folds} instances")
    fold_pairs = split(ds_train, SplitSpec.kfold(grid.folds, derive_seed(seed, "cv-folds")))
    fold_hash = "|".join(_content_hash(te) for _, te in fold_pairs)
    cells = grid.cells()

    def run_cell_fold(task):
        (u, eta, alpha), fold_i = task
        tr, te = fold_pairs[fold_i]
        cell_cfg = replace(cfg, n_hidden=u, learning_rate=eta, momentum=alpha)
        cell_seed = derive_seed(seed, "cell", u, repr(eta), repr(alpha), fold_i)
        try:
            scaled_tr, sp = scale_features(tr)
            model = fit_method(scaled_tr, cell_cfg, cell_seed, jobs=1)
            pred = model.predict(sp.apply(te.features))
            return accuracy(te.labels, pred), None
        except DeepMlcError as exc:
            return None, f"{type(exc).__name__}: {exc}"

    tasks = [(cell, fold_i) for cell in cells for fold_i in range(grid.folds)]
    outcomes = parallel_map(run_cell_fold, tasks, jobs)

    table = []
    for ci, (u, eta, alpha) in enumerate(cells):
        outs = outcomes[ci * grid.folds:(ci + 1) * grid.folds]
        errors = [e for _, e in outs if e is not None]
        accs = [a for a, _ in outs if a is not None]
        mean = float(np.mean(accs)) if len(accs) == grid.folds else None
        table.append({"n_hidden": u, "learning_rate": eta, "momentum": alpha,
                      "fold_accuracies": accs, "mean_accuracy": mean,
                      "error": errors[0] if errors else None,
                      "fold_hash": fold_hash})
        if progress is not None:
            progress(phase="grid", n_hidden=u, learning_rate=eta, momentum=alpha,
                     mean_accuracy=mean)

    viable = [row for row in table if row["mean_accuracy"] is not None]
    if not viable:
        raise TrainingError("every grid cell failed")
    best = min(viable, key=lambda r: (-r["mean_accuracy"], r["n_hidden"],
                                      -r["learning_rate"], r["momentum"]))
    chosen = {k: best[k] for k in ("n_hidden", "learning_rate", "momentum")}
    return GridResult(chosen, table, fold_hash, grid.folds)


# ---------------------------------------------------------------------------
# Trained pipelines and bundle persistence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrainedPipeline:
    """A fitted scaler plus a fitted model, operating on raw feature rows."""

    method: str
    scaling: ScalingParams
    model: object
    seed: int
    config: MethodConfig

    def predict(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.scaling.mins.shape[0]:
            raise DimensionMismatch(
                f"model was trained on {self.scaling.mins.shape[0]} features, "
                f"dataset has {X.shape[1]}")
        return self.model.predict(self.scaling.apply(X))

    def evaluate(self, ds: Dataset) -> MetricSet:
        return evaluate_predictions(ds.labels, self.predict(ds.features))


def train_pipeline(train: Dataset, cfg: MethodConfig, seed, jobs=1,
                   progress=None) -> TrainedPipeline:
    scaled, sp = scale_features(train)
    model = fit_method(scaled, cfg, seed, jobs=jobs, progress=progress)
    return TrainedPipeline(cfg.method, sp, model, seed, cfg)


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=1) + "\n").encode("utf-8")


def save_bundle(pipe: TrainedPipeline, out_dir):
    """Persist a pipeline as a directory bundle; bytes are deterministic
    for identical inputs (no timestamps)."""
    os.makedirs(out_dir, exist_ok=True)
    model = pipe.model
    components = {"scaling": "scaling.json"}
    if isinstance(model, DbnLabelModel):
        save_stack(model.stack, os.path.join(out_dir, "stack.bin"))
        components["stack"] = "stack.bin"
    elif isinstance(model, FeatureStackModel):
        if isinstance(model.extractor, Rbm):
            save_rbm(model.extractor, os.path.join(out_dir, "extractor.rbm"))
            components["extractor_rbm"] = "extractor.rbm"
        else:
            save_stack(model.extractor, os.path.join(out_dir, "extractor.dbn"))
            components["extractor_dbn"] = "extractor.dbn"
        with open(os.path.join(out_dir, "inner.json"), "wb") as fh:
            fh.write(_json_bytes(model_to_json_dict(model.inner)))
        components["inner"] = "inner.json"
    else:
        with open(os.path.join(out_dir, "model.json"), "wb") as fh:
            fh.write(_json_bytes(model_to_json_dict(model)))
        components["model"] = "model.json"
    manifest = {
        "format_version": 1,
        "method": pipe.method,
        "kind": getattr(model, "kind", pipe.method),
        "label_count": model.label_count,
        "threshold": getattr(model, "threshold", None),
        "seed": pipe.seed,
        "config": pipe.config.to_json_dict(),
        "components": components,
    }
    with open(os.path.join(out_dir, "scaling.json"), "wb") as fh:
        fh.write(_json_bytes(pipe.scaling.to_json_dict()))
    with open(os.path.join(out_dir, "manifest.json"), "wb") as fh:
        fh.write(_json_bytes(manifest))


def load_bundle(bundle_dir) -> TrainedPipeline:
    with open(os.path.join(bundle_dir, "manifest.json"), encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("format_version") != 1:
        raise ConfigError(f"unsupported bundle version {manifest.get('format_version')}")
    comp = manifest["components"]
    scaling = ScalingParams.load(os.path.join(bundle_dir, comp["scaling"]))
    cfg = MethodConfig.from_json_dict(manifest["config"])
    threshold = manifest.get("threshold")
    if "stack" in comp:
        stack = load_stack(os.path.join(bundle_dir, comp["stack"]))
        model = DbnLabelModel(stack, threshold)
    elif "inner" in comp:
        if "extractor_rbm" in comp:
            extractor = load_rbm(os.path.join(bundle_dir, comp["extractor_rbm"]))
        else:
            extractor = load_stack(os.path.join(bundle_dir, comp["extractor_dbn"]))
        with open(os.path.join(bundle_dir, comp["inner"]), encoding="utf-8") as fh:
            inner = model_from_json_dict(json.load(fh))
        model = FeatureStackModel(extractor, inner)
    else:
        with open(os.path.join(bundle_dir, comp["model"]), encoding="utf-8") as fh:
            model = model_from_json_dict(json.load(fh))
    return TrainedPipeline(manifest["method"], scaling, model, manifest["seed"], cfg)


# ---------------------------------------------------------------------------
# Experiment runner
# ---------------------------------------------------------------------------

_CONFIG_KEYS = {"dataset", "methods", "grid", "seed", "split", "threshold",
                "jobs", "output_dir", "overrides"}
_DATASET_KEYS = {"path", "format", "label_count", "labels_first", "name"}

REPORT_SCHEMA = {
    "type": "object",
    "required": ["dataset", "seed", "split", "methods"],
    "properties": {
        "dataset": {
            "type": "object",
            "required": ["name", "n_instances", "n_labels", "n_features",
                         "label_cardinality"],
        },
        "seed": {"type": "integer"},
        "split": {"type": "object"},
        "methods": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["method", "metrics", "seed"],
                "properties": {
                    "metrics": {
                        "type": "object",
                        "required": ["accuracy", "hamming_loss", "exact_match",
                                     "n_test"],
                        "properties": {
                            "accuracy": {"type": "number", "minimum": 0, "maximum": 1},
                            "hamming_loss": {"type": "number", "minimum": 0, "maximum": 1},
                            "exact_match": {"type": "number", "minimum": 0, "maximum": 1},
                            "n_test": {"type": "integer", "minimum": 0},
                        },
                    },
                },
            },
        },
        "timings": {"type": "object"},
    },
}

METRICS_SCHEMA = REPORT_SCHEMA["properties"]["methods"]["items"]["properties"]["metrics"]


@dataclass
class EvalReport:
    dataset: dict
    seed: int
    split: dict
    methods: list
    config_echo: dict
    timings: dict

    def to_json_dict(self, include_timings=True):
        out = {"dataset": self.dataset, "seed": self.seed, "split": self.split,
               "methods": self.methods, "config_echo": self.config_echo}
        if include_timings:
            out["timings"] = self.timings
        return out

    def csv_rows(self):
        rows = [("method", "metric", "value")]
        for entry in self.methods:
            for metric, value in sorted(entry["metrics"].items()):
                rows.append((entry["method"], metric, repr(value)))
        return rows


def load_experiment_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    validate_experiment_config(cfg)
    return cfg


def validate_experiment_config(cfg: dict):
    """Schema checks that run before any training starts."""
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(cfg) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    if "dataset" not in cfg or not isinstance(cfg["dataset"], dict):
        raise ConfigError("config needs a 'dataset' object")
    ds_unknown = set(cfg["dataset"]) - _DATASET_KEYS
    if ds_unknown:
        raise ConfigError(f"unknown dataset keys {sorted(ds_unknown)}")
    if "path" not in cfg["dataset"]:
        raise ConfigError("dataset.path is required")
    methods = cfg.get("methods")
    if not isinstance(methods, list) or not methods:
        raise ConfigError("config needs a non-empty 'methods' list")
    for entry in methods:
        name = entry if isinstance(entry, str) else entry.get("method")
        if name not in ALL_METHODS:
            raise ConfigError(f"unknown method {name!r}; expected one of {ALL_METHODS}")
        if isinstance(entry, dict):
            bad = set(entry) - set(MethodConfig(method="br").to_json_dict()) - {"method"}
            if bad:
                raise ConfigError(f"unknown method option keys {sorted(bad)} for {name}")
    grid = cfg.get("grid")
    if grid is not None and not isinstance(grid, dict) and grid not in ("default", "reduced"):
        raise ConfigError("grid must be null, 'default', 'reduced', or an object")
    split_cfg = cfg.get("split")
    if split_cfg is not None:
        if not isinstance(split_cfg, dict) or split_cfg.get("mode") not in ("holdout", "kfold"):
            raise ConfigError("split.mode must be 'holdout' or 'kfold'")


def _grid_from_config(grid):
    if grid is None:
        return None
    if grid == "default":
        return GridSpec()
    if grid == "reduced":
        return REDUCED_GRID
    return GridSpec(u_values=tuple(grid.get("u_values", GridSpec.u_values)),
                    eta_values=tuple(grid.get("eta_values", GridSpec.eta_values)),
                    alpha_values=tuple(grid.get("alpha_values", GridSpec.alpha_values)),
                    folds=int(grid.get("folds", 3)))


def _load_dataset_from_config(ds_cfg: dict) -> Dataset:
    path = ds_cfg["path"]
    fmt = ds_cfg.get("format")
    if fmt is None:
        fmt = "csv" if str(path).lower().endswith(".csv") else "arff"
    if fmt == "arff":
        return load_arff(path, label_count=ds_cfg.get("label_count"))
    if fmt == "csv":
        if "label_count" not in ds_cfg:
            raise ConfigError("csv datasets need dataset.label_count")
        return load_csv(path, ds_cfg["label_count"], ds_cfg.get("labels_first", True))
    raise ConfigError(f"unknown dataset format {fmt!r}")


def _method_config(entry, defaults: dict) -> MethodConfig:
    if isinstance(entry, str):
        merged = dict(defaults, method=entry)
    else:
        merged = dict(defaults, **entry)
    base = merged.pop("base", None)
    if base is not None and not isinstance(base, BaseConfig):
        base = BaseConfig(**base)
    return MethodConfig(**merged) if base is None else MethodConfig(base=base, **merged)


def evaluate_method_on_split(train: Dataset, test: Dataset, cfg: MethodConfig,
                             grid, seed, jobs=1, progress=None):
    """Grid-search (when applicable), train the final pipeline, evaluate.

    Returns (entry, pipeline) where entry holds the metrics, the chosen
    hyperparameters, and the wall-clock seconds per phase.
    """
    entry = {"method": cfg.method, "seed": seed, "chosen": None, "cv_table": None}
    timings = {}
    if grid is not None and uses_rbm_grid(cfg.method):
        t0 = time.perf_counter()
        gr = grid_search(train, cfg, grid, derive_seed(seed, "grid"), jobs=jobs,
                         progress=progress)
        timings["grid_seconds"] = time.perf_counter() - t0
        cfg = replace(cfg, **gr.chosen)
        entry["chosen"] = gr.chosen
        entry["cv_table"] = gr.table
        entry["fold_hash"] = gr.fold_hash
    t0 = time.perf_counter()
    pipe = train_pipeline(train, cfg, derive_seed(seed, "final"), jobs=jobs,
                          progress=progress)
    timings["train_seconds"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    metrics = pipe.evaluate(test)
    timings["eval_seconds"] = time.perf_counter() - t0
    entry["metrics"] = metrics.to_json_dict()
    entry["config"] = cfg.to_json_dict()
    entry["wall_clock"] = timings
    return entry, pipe


def run_experiment(config, jobs=None, progress=None) -> EvalReport:
    """Execute a declarative experiment config (path or dict) end to end."""
    if not isinstance(config, dict):
        config = load_experiment_config(config)
    else:
        validate_experiment_config(config)
    seed = int(config.get("seed", 0))
    jobs = int(config.get("jobs", 1)) if jobs is None else jobs
    ds = _load_dataset_from_config(config["dataset"])
    split_cfg = config.get("split") or {"mode": "holdout", "fraction": 0.5}
    if split_cfg["mode"] == "holdout":
        spec = SplitSpec.holdout(float(split_cfg.get("fraction", 0.5)),
                                 derive_seed(seed, "split"))
    else:
        spec = SplitSpec.kfold(int(split_cfg.get("k", 2)), derive_seed(seed, "split"))
    train, test = split(ds, spec)[0]
    grid = _grid_from_config(config.get("grid"))
    defaults = {"threshold": float(config.get("threshold", 0.5))}
    for override, value in (config.get("overrides") or {}).items():
        defaults[override] = value

    st = stats(ds)
    report = EvalReport(
        dataset={"name": ds.name, "n_instances": st.n_instances, "n_labels": st.n_labels,
                 "n_features": st.n_features, "label_cardinality": st.label_cardinality},
        seed=seed,
        split={"mode": spec.mode, "fraction": spec.fraction, "k": spec.k,
               "seed": spec.seed, "train_hash": _content_hash(train),
               "test_hash": _content_hash(test)},
        methods=[],
        config_echo=config,
        timings={},
    )
    t_start = time.perf_counter()
    for entry_cfg in config["methods"]:
        cfg = _method_config(entry_cfg, defaults)
        if progress is not None:
            progress(phase="method", method=cfg.method)
        entry, _ = evaluate_method_on_split(train, test, cfg, grid,
                                            derive_seed(seed, "method", cfg.method),
                                            jobs=jobs, progress=progress)
        report.methods.append(entry)
    report.timings["total_seconds"] = time.perf_counter() - t_start

    out_dir = config.get("output_dir")
    if out_dir:
        write_report(report, out_dir)
    return report


def write_report(report: EvalReport, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report.to_json_dict(), fh, sort_keys=True, indent=1)
        fh.write("\n")
    with open(os.path.join(out_dir, "report.csv"), "w", encoding="utf-8") as fh:
        for row in report.csv_rows():
            fh.write(",".join(str(c) for c in row) + "\n")


# ---------------------------------------------------------------------------
# Hidden-unit sweeps (accuracy vs u at fixed eta=0.1, alpha=0.1)
# ---------------------------------------------------------------------------

def sweep_hidden_units(ds: Dataset, methods, u_list, seed, eta=0.1, alpha=0.1,
                       rbm_epochs=1000, cd_steps=1, batch_size=100,
                       weight_cost=2e-5, base=None, threshold=0.5, n_chains=50,
                       jobs=1, progress=None):
    """Accuracy of each method on RBM features for every u, plus a raw-
    feature baseline row per method tagged u='raw'.

    One RBM is trained per u and shared across the methods, which is what
    makes gap-vs-width comparisons meaningful.
    """
    if not u_list:
        raise ValueError("u_list must be non-empty")
    for name in methods:
        if name not in RAW_METHODS:
            raise ConfigError(f"sweep methods must be base transforms {RAW_METHODS}, "
                              f"got {name!r}")
    base = base or BaseConfig()
    train, test = split(ds, SplitSpec.holdout(0.5, derive_seed(seed, "sweep-split")))[0]
    scaled_tr, sp = scale_features(train)
    X_te = sp.apply(test.features)
    rows = []

    def eval_inner(name, fit_ds, X_eval, fit_seed):
        cfg = MethodConfig(method=name, threshold=threshold, base=base, n_chains=n_chains)
        model = _fit_raw(name, fit_ds, cfg, fit_seed, jobs)
        return accuracy(test.labels, model.predict(X_eval))

    for name in methods:
        acc = eval_inner(name, scaled_tr, X_te, derive_seed(seed, "sweep-raw", name))
        rows.append({"method": name, "u": "raw", "accuracy": acc})
        if progress is not None:
            progress(phase="sweep", method=name, u="raw", accuracy=acc)
    for u in u_list:
        hyper = RbmHyper(n_hidden=int(u), learning_rate=eta, momentum=alpha,
                         weight_cost=weight_cost, epochs=rbm_epochs,
                         cd_steps=cd_steps, batch_size=batch_size)
        rbm, _ = cd_train(scaled_tr.features, hyper, derive_seed(seed, "sweep-rbm", int(u)))
        Z_tr = scaled_tr.with_features(rbm_transform(rbm, scaled_tr.features))
        Z_te = rbm_transform(rbm, X_te)
        for name in methods:
            acc = eval_inner(name, Z_tr, Z_te, derive_seed(seed, "sweep", int(u), name))
            rows.append({"method": name, "u": int(u), "accuracy": acc})
            if progress is not None:
                progress(phase="sweep", method=name, u=int(u), accuracy=acc)
    return rows


def sweep_rows_to_csv(rows) -> str:
    lines = ["method,u,accuracy"]
    for row in rows:
        lines.append(f"{row['method']},{row['u']},{row['accuracy']!r}")
    return "\n".join(lines) + "\n"
