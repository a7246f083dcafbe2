"""Multi-label dataset loading, validation, scaling, and splitting.

Supports the MEKA ARFF convention (label count encoded as a ``-C L`` token
in the relation name, labels at the front for positive L, at the back for
negative L) and plain numeric CSV with a header row. The ARFF grammar is a
strict subset: numeric attributes, binary-nominal {0,1} attributes, dense
and sparse data rows. Missing values are rejected.
"""

from __future__ import annotations

import csv
import json
import os
import re
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, UnsupportedAttributeError, ValidationError


@dataclass(frozen=True)
class Dataset:
    """Immutable multi-label dataset: N x d real features, N x L binary labels."""

    name: str
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple
    label_names: tuple

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        Y = np.ascontiguousarray(np.asarray(self.labels))
        if X.ndim != 2 or Y.ndim != 2:
            raise ValidationError("features and labels must be 2-d matrices")
        if X.shape[0] != Y.shape[0]:
            raise ValidationError(
                f"row count mismatch: {X.shape[0]} feature rows vs {Y.shape[0]} label rows")
        if X.shape[0] < 1 or X.shape[1] < 1 or Y.shape[1] < 1:
            raise ValidationError("dataset needs N >= 1, d >= 1, L >= 1")
        if not np.isin(Y, (0, 1)).all():
            raise ValidationError("label entries must be exactly 0 or 1")
        Y = Y.astype(np.int8)
        X.setflags(write=False)
        Y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", Y)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "label_names", tuple(self.label_names))
        if len(self.feature_names) != X.shape[1]:
            raise ValidationError("feature_names length must equal d")
        if len(self.label_names) != Y.shape[1]:
            raise ValidationError("label_names length must equal L")

    @property
    def n_instances(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    @property
    def n_labels(self):
        return self.labels.shape[1]

    def take(self, rows) -> "Dataset":
        """New Dataset restricted to the given row indices, in order."""
        rows = np.asarray(rows, dtype=np.intp)
        return Dataset(self.name, self.features[rows], self.labels[rows],
                       self.feature_names, self.label_names)

    def with_features(self, X, feature_names=None) -> "Dataset":
        """New Dataset with a replaced feature matrix (same rows and labels)."""
        X = np.asarray(X, dtype=np.float64)
        if feature_names is None:
            feature_names = tuple(f"z{i}" for i in range(X.shape[1]))
        return Dataset(self.name, X, self.labels, feature_names, self.label_names)


@dataclass(frozen=True)
class DatasetStats:
    n_instances: int
    n_labels: int
    n_features: int
    label_cardinality: float


def stats(ds: Dataset) -> DatasetStats:
    """Basic dataset statistics; label cardinality is the mean labels/instance."""
    lc = float(ds.labels.sum()) / ds.n_instances
    return DatasetStats(ds.n_instances, ds.n_labels, ds.n_features, lc)


@dataclass(frozen=True)
class SplitSpec:
    """Either holdout(fraction) or kfold(k), with a seed for the shuffle."""

    mode: str
    seed: int
    fraction: float = 0.0
    k: int = 0

    def __post_init__(self):
        if self.mode == "holdout":
            if not 0.0 < self.fraction < 1.0:
                raise ValueError("holdout fraction must be strictly between 0 and 1")
        elif self.mode == "kfold":
            if self.k < 2:
                raise ValueError("kfold needs k >= 2")
        else:
            raise ValueError(f"unknown split mode {self.mode!r}")

    @classmethod
    def holdout(cls, fraction, seed):
        return cls(mode="holdout", seed=seed, fraction=fraction)

    @classmethod
    def kfold(cls, k, seed):
        return cls(mode="kfold", seed=seed, k=k)


def split(ds: Dataset, spec: SplitSpec):
    """Seeded disjoint train/test splits covering all rows.

    holdout: one (train, test) pair with floor(fraction * N) training rows.
    kfold: k pairs, pair i testing on fold i. Row order inside each part is
    the shuffled order, so downstream training sees a fixed permutation.
    """
    n = ds.n_instances
    perm = np.random.default_rng(spec.seed).permutation(n)
    if spec.mode == "holdout":
        n_train = int(spec.fraction * n)
        if n_train < 1 or n_train >= n:
            raise ValueError(f"holdout fraction {spec.fraction} leaves an empty part for N={n}")
        return [(ds.take(perm[:n_train]), ds.take(perm[n_train:]))]
    if spec.k > n:
        raise ValueError(f"kfold k={spec.k} exceeds N={n}")
    folds = np.array_split(perm, spec.k)
    pairs = []
    for i in range(spec.k):
        train_rows = np.concatenate([folds[j] for j in range(spec.k) if j != i])
        pairs.append((ds.take(train_rows), ds.take(folds[i])))
    return pairs


# ---------------------------------------------------------------------------
# Feature scaling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingParams:
    """Per-column (min, max) learned on training data.

    apply() maps affinely into [0,1] and clamps, so test-time values outside
    the training range cannot leave the valid range for Bernoulli visible
    units. Constant columns map to 0.
    """

    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        mins = np.asarray(self.mins, dtype=np.float64)
        maxs = np.asarray(self.maxs, dtype=np.float64)
        mins.setflags(write=False)
        maxs.setflags(write=False)
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)

    def apply(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.mins.shape[0]:
            raise ValidationError(
                f"scaling expects {self.mins.shape[0]} columns, got {X.shape[-1]}")
        span = self.maxs - self.mins
        safe = np.where(span > 0, span, 1.0)
        out = (X - self.mins) / safe
        out[..., span == 0] = 0.0
        return np.clip(out, 0.0, 1.0)

    def to_json_dict(self):
        return {"mins": self.mins.tolist(), "maxs": self.maxs.tolist()}

    @classmethod
    def from_json_dict(cls, d):
        return cls(np.array(d["mins"], dtype=np.float64),
                   np.array(d["maxs"], dtype=np.float64))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, sort_keys=True)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


def scale_features(ds: Dataset):
    """Min-max scale each feature column into [0,1]; returns (scaled, params)."""
    params = ScalingParams(ds.features.min(axis=0), ds.features.max(axis=0))
    return ds.with_features(params.apply(ds.features), ds.feature_names), params


# ---------------------------------------------------------------------------
# ARFF (MEKA-convention subset)
# ---------------------------------------------------------------------------

_RELATION_RE = re.compile(r"@relation\s+(.+)", re.IGNORECASE)
_ATTR_RE = re.compile(r"@attribute\s+('[^']*'|\"[^\"]*\"|\S+)\s+(.+)", re.IGNORECASE)
_C_TOKEN_RE = re.compile(r"-C\s+(-?\d+)")


def _unquote(token):
    token = token.strip()
    if len(token) >= 2 and token[0] == token[-1] and token[0] in "'\"":
        return token[1:-1]
    return token


def _parse_attribute(line, lineno, path):
    m = _ATTR_RE.match(line)
    if not m:
        raise ParseError("malformed @attribute line", line=lineno, path=path)
    name = _unquote(m.group(1))
    typ = m.group(2).strip()
    if typ.startswith("{"):
        if not typ.endswith("}"):
            raise ParseError("unterminated nominal specification", line=lineno, path=path)
        values = {_unquote(v) for v in typ[1:-1].split(",")}
        if values <= {"0", "1"}:
            return name, "binary"
        raise UnsupportedAttributeError(
            f"{path}:{lineno}: nominal attribute {name!r} is not binary {{0,1}}")
    if typ.lower().split()[0] in ("numeric", "real", "integer"):
        return name, "numeric"
    raise UnsupportedAttributeError(
        f"{path}:{lineno}: attribute {name!r} has unsupported type {typ!r}")


def _parse_dense_row(line, n_attrs, lineno, path):
    cells = [c.strip() for c in line.split(",")]
    if len(cells) != n_attrs:
        raise ParseError(f"expected {n_attrs} values, got {len(cells)}",
                         line=lineno, path=path)
    row = np.empty(n_attrs)
    for i, cell in enumerate(cells):
        if cell == "?":
            raise ValidationError(f"{path}:{lineno}: missing value in column {i}")
        try:
            row[i] = float(_unquote(cell))
        except ValueError:
            raise ParseError(f"non-numeric value {cell!r}", line=lineno, path=path) from None
    return row


def _parse_sparse_row(line, n_attrs, lineno, path):
    body = line.strip()[1:-1].strip()
    row = np.zeros(n_attrs)
    if not body:
        return row
    for pair in body.split(","):
        bits = pair.strip().split(None, 1)
        if len(bits) != 2:
            raise ParseError(f"malformed sparse entry {pair!r}", line=lineno, path=path)
        idx_s, val_s = bits
        try:
            idx = int(idx_s)
            val = float(_unquote(val_s))
        except ValueError:
            if val_s.strip() == "?":
                raise ValidationError(f"{path}:{lineno}: missing value in column {idx_s}") from None
            raise ParseError(f"malformed sparse entry {pair!r}", line=lineno, path=path) from None
        if not 0 <= idx < n_attrs:
            raise ParseError(f"sparse index {idx} out of range", line=lineno, path=path)
        row[idx] = val
    return row


def _split_label_columns(matrix, attr_names, label_count, path):
    n_attrs = matrix.shape[1]
    if label_count == 0 or abs(label_count) >= n_attrs:
        raise ValidationError(
            f"{path}: label count {label_count} impossible for {n_attrs} columns")
    if label_count > 0:
        lab_idx = list(range(label_count))
        feat_idx = list(range(label_count, n_attrs))
    else:
        lab_idx = list(range(n_attrs + label_count, n_attrs))
        feat_idx = list(range(0, n_attrs + label_count))
    Y = matrix[:, lab_idx]
    for pos, col in enumerate(lab_idx):
        if not np.isin(Y[:, pos], (0.0, 1.0)).all():
            raise ValidationError(
                f"{path}: label column {attr_names[col]!r} contains non-binary values")
    X = matrix[:, feat_idx]
    feat_names = tuple(attr_names[i] for i in feat_idx)
    lab_names = tuple(attr_names[i] for i in lab_idx)
    return X, Y.astype(np.int8), feat_names, lab_names


def load_arff(path, label_count=None) -> Dataset:
    """Load a MEKA-convention ARFF file.

    If label_count is None it is read from the ``-C L`` token in the relation
    name. Positive L: the first L attributes are labels; negative: the last.
    """
    attr_names, attr_types = [], []
    relation = None
    rows = []
    in_data = False
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            if not in_data:
                low = line.lower()
                if low.startswith("@relation"):
                    relation = _unquote(_RELATION_RE.match(line).group(1))
                elif low.startswith("@attribute"):
                    name, typ = _parse_attribute(line, lineno, path)
                    attr_names.append(name)
                    attr_types.append(typ)
                elif low.startswith("@data"):
                    if not attr_names:
                        raise ParseError("@data before any @attribute", line=lineno, path=path)
                    in_data = True
                else:
                    raise ParseError(f"unrecognized header line {line!r}", line=lineno, path=path)
                continue
            if line.startswith("{"):
                if not line.endswith("}"):
                    raise ParseError("unterminated sparse row", line=lineno, path=path)
                rows.append(_parse_sparse_row(line, len(attr_names), lineno, path))
            else:
                rows.append(_parse_dense_row(line, len(attr_names), lineno, path))
    if relation is None:
        raise ParseError("missing @relation header", path=path)
    if not in_data:
        raise ParseError("missing @data section", path=path)
    if not rows:
        raise ValidationError(f"{path}: no data rows")

    if label_count is None:
        m = _C_TOKEN_RE.search(relation)
        if not m:
            raise ValidationError(
                f"{path}: relation {relation!r} has no -C token and no label_count given")
        label_count = int(m.group(1))

    matrix = np.vstack(rows)
    X, Y, feat_names, lab_names = _split_label_columns(matrix, attr_names, label_count, path)
    name = relation.split(":")[0].strip() or str(path)
    return Dataset(name, X, Y, feat_names, lab_names)


def write_arff(ds: Dataset, path):
    """Write a dataset back out in the same MEKA convention (labels first)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"@relation '{ds.name}: -C {ds.n_labels}'\n\n")
        for name in ds.label_names:
            fh.write(f"@attribute {name} {{0,1}}\n")
        for name in ds.feature_names:
            fh.write(f"@attribute {name} numeric\n")
        fh.write("\n@data\n")
        for y_row, x_row in zip(ds.labels, ds.features):
            cells = [str(int(v)) for v in y_row] + [repr(float(v)) for v in x_row]
            fh.write(",".join(cells) + "\n")


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def load_csv(path, label_count, labels_first=True) -> Dataset:
    """Load a numeric CSV with header row; label columns per labels_first."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", path=path) from None
        n_cols = len(header)
        if label_count >= n_cols or label_count < 1:
            raise ValidationError(
                f"{path}: label_count {label_count} impossible for {n_cols} columns")
        rows = []
        for lineno, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != n_cols:
                raise ParseError(f"expected {n_cols} cells, got {len(cells)}",
                                 line=lineno, path=path)
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                raise ParseError("non-numeric cell", line=lineno, path=path) from None
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    matrix = np.array(rows)
    signed = label_count if labels_first else -label_count
    X, Y, feat_names, lab_names = _split_label_columns(matrix, header, signed, path)
    name = os.path.splitext(os.path.basename(str(path)))[0]
    return Dataset(name, X, Y, feat_names, lab_names)


def write_csv(ds: Dataset, path, labels_first=True):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if labels_first:
            writer.writerow(list(ds.label_names) + list(ds.feature_names))
            for y_row, x_row in zip(ds.labels, ds.features):
                writer.writerow([int(v) for v in y_row] + [repr(float(v)) for v in x_row])
        else:
            writer.writerow(list(ds.feature_names) + list(ds.label_names))
            for y_row, x_row in zip(ds.labels, ds.features):
                writer.writerow([repr(float(v)) for v in x_row] + [int(v) for v in y_row])
