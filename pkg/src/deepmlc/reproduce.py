"""Re-run the published comparison tables on whatever datasets are present.

Each table row pairs the published accuracy with the locally measured one
(logistic-regression base, 50/50 split, seeded). Datasets missing from the
data directory become SKIPPED rows rather than failures, so partial data
directories still produce a useful CSV.
"""

from __future__ import annotations

import os

from .data import SplitSpec, load_arff, split
from .errors import ConfigError
from .harness import REDUCED_GRID, MethodConfig, evaluate_method_on_split, uses_rbm_grid
from .reference import TABLES, reference_value
from .util import derive_seed


def find_dataset_file(data_dir, name):
    """Case-insensitive <name>.arff lookup inside data_dir."""
    if not os.path.isdir(data_dir):
        return None
    for entry in sorted(os.listdir(data_dir)):
        stem, ext = os.path.splitext(entry)
        if stem.lower() == name and ext.lower() == ".arff":
            return os.path.join(data_dir, entry)
    return None


def reproduce_table(table_id, data_dir, seed=0, grid=REDUCED_GRID, jobs=1,
                    overrides=None, datasets=None, progress=None):
    """Measure one comparison table; returns a list of row dicts.

    overrides feed extra MethodConfig fields (e.g. rbm_epochs for quick
    desk runs); datasets optionally restricts the rows.
    """
    if table_id not in TABLES:
        raise ConfigError(f"unknown table id {table_id!r}; expected one of {tuple(TABLES)}")
    table = TABLES[table_id]
    wanted = tuple(datasets) if datasets else tuple(table["values"])
    overrides = overrides or {}
    rows = []
    for ds_name in wanted:
        if ds_name not in table["values"]:
            raise ConfigError(f"dataset {ds_name!r} has no row in table {table_id}")
        path = find_dataset_file(data_dir, ds_name)
        if path is None:
            for method in table["methods"]:
                rows.append({"dataset": ds_name, "method": method,
                             "reference": reference_value(table_id, ds_name, method),
                             "measured": None, "delta": None, "status": "SKIPPED"})
            continue
        ds = load_arff(path)
        train, test = split(ds, SplitSpec.holdout(0.5, derive_seed(seed, "split", ds_name)))[0]
        for method in table["methods"]:
            if progress is not None:
                progress(phase="reproduce", dataset=ds_name, method=method)
            cfg = MethodConfig(method=method, **overrides)
            entry, _ = evaluate_method_on_split(
                train, test, cfg, grid if uses_rbm_grid(method) else None,
                derive_seed(seed, "method", ds_name, method), jobs=jobs,
                progress=progress)
            measured = entry["metrics"]["accuracy"]
            ref = reference_value(table_id, ds_name, method)
            rows.append({"dataset": ds_name, "method": method, "reference": ref,
                         "measured": measured,
                         "delta": None if ref is None else measured - ref,
                         "status": "OK"})
    return rows


def reproduce_rows_to_csv(rows) -> str:
    def cell(v):
        if v is None:
            return ""
        if isinstance(v, float):
            return repr(v)
        return str(v)

    lines = ["dataset,method,reference,measured,delta,status"]
    for r in rows:
        lines.append(",".join(cell(r[k]) for k in
                              ("dataset", "method", "reference", "measured", "delta",
                               "status")))
    return "\n".join(lines) + "\n"
