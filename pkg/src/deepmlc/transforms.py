"""Problem-transformation multi-label classifiers over any feature space.

BR trains one binary model per label; CC chains them so each consumes its
predecessors' labels (ground truth while training, own thresholded
predictions at test time); ECC averages many randomly-ordered chains; LP
learns one softmax over the observed labelsets; RAkEL ensembles LP over
random k-subsets of labels; FW learns a 4-class softmax per label pair and
lets the predicted pair values vote on the two labels. A feature-stack
wrapper composes any of these with an RBM or DBN feature extractor.

Vote fractions always land in [0,1]; a probability or vote fraction equal
to the threshold predicts 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from .data import Dataset
from .dbn import DbnStack, forward as dbn_forward, predict_labels
from .errors import DimensionMismatch
from .linear import (SoftmaxModel, fit_logistic, fit_softmax,
                     logistic_from_json_dict, logistic_to_json_dict,
                     predict_dist, predict_prob, softmax_from_json_dict,
                     softmax_to_json_dict)
from .rbm import Rbm, transform as rbm_transform
from .util import derive_seed, parallel_map


@dataclass(frozen=True)
class BaseConfig:
    """Hyperparameters handed to every base logistic/softmax fit."""

    l2: float = 1e-4
    epochs: int = 500
    rate: float = 0.1


@dataclass(frozen=True)
class VoteMatrix:
    """Accumulated per-label votes plus the per-label normalization counts."""

    votes: np.ndarray
    counts: np.ndarray

    def fractions(self):
        safe = np.where(self.counts > 0, self.counts, 1)
        frac = self.votes / safe
        if (self.counts == 0).any():
            frac = frac.copy()
            frac[..., self.counts == 0] = 0.0
        return frac


def _rows(x, width, what):
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != width:
        raise DimensionMismatch(f"{what} expects {width} features, got {X.shape[1]}")
    return X, single


def _maybe_row(pred, single):
    return pred[0] if single else pred


@dataclass(frozen=True)
class BrModel:
    kind: ClassVar[str] = "BR"
    models: tuple
    threshold: float
    label_count: int
    n_features: int

    def probabilities(self, X):
        return np.column_stack([predict_prob(m, X) for m in self.models])

    def predict(self, x):
        X, single = _rows(x, self.n_features, "BR")
        pred = (self.probabilities(X) >= self.threshold).astype(np.int8)
        return _maybe_row(pred, single)


def fit_br(ds: Dataset, base=BaseConfig(), seed=0, threshold=0.5, jobs=1) -> BrModel:
    """One independent logistic model per label."""
    X, Y = ds.features, ds.labels

    def fit_one(j):
        return fit_logistic(X, Y[:, j], l2=base.l2, epochs=base.epochs, rate=base.rate,
                            seed=derive_seed(seed, "label", j))

    models = parallel_map(fit_one, range(ds.n_labels), jobs)
    return BrModel(tuple(models), threshold, ds.n_labels, ds.n_features)


@dataclass(frozen=True)
class CcModel:
    kind: ClassVar[str] = "CC"
    order: tuple
    models: tuple
    threshold: float
    label_count: int
    n_features: int

    def predict(self, x):
        X, single = _rows(x, self.n_features, "CC")
        chained = np.zeros((X.shape[0], self.label_count))
        for pos, target in enumerate(self.order):
            aug = np.hstack([X, chained[:, list(self.order[:pos])]])
            p = predict_prob(self.models[pos], aug)
            chained[:, target] = (p >= self.threshold).astype(np.float64)
        return _maybe_row(chained.astype(np.int8), single)


def fit_cc(ds: Dataset, order, base=BaseConfig(), seed=0, threshold=0.5) -> CcModel:
    """Classifier chain along the given label order.

    Training augments the features with the ground-truth labels of the
    preceding chain positions; prediction feeds forward its own
    thresholded outputs instead.
    """
    order = tuple(int(j) for j in order)
    if sorted(order) != list(range(ds.n_labels)):
        raise ValueError(f"order {order} is not a permutation of 0..{ds.n_labels - 1}")
    X, Y = ds.features, ds.labels
    models = []
    for pos, target in enumerate(order):
        aug = np.hstack([X, Y[:, list(order[:pos])].astype(np.float64)])
        models.append(fit_logistic(aug, Y[:, target], l2=base.l2, epochs=base.epochs,
                                   rate=base.rate, seed=derive_seed(seed, "chain-pos", pos)))
    return CcModel(order, tuple(models), threshold, ds.n_labels, ds.n_features)


@dataclass(frozen=True)
class EccModel:
    kind: ClassVar[str] = "ECC"
    chains: tuple
    threshold: float
    label_count: int
    n_features: int

    def votes(self, x):
        X, _ = _rows(x, self.n_features, "ECC")
        total = np.zeros((X.shape[0], self.label_count))
        for chain in self.chains:
            total += chain.predict(X)
        return VoteMatrix(total, np.full(self.label_count, len(self.chains)))

    def predict(self, x):
        X, single = _rows(x, self.n_features, "ECC")
        frac = self.votes(X).fractions()
        return _maybe_row((frac >= self.threshold).astype(np.int8), single)


def fit_ecc(ds: Dataset, n_chains=50, base=BaseConfig(), seed=0, threshold=0.5,
            jobs=1) -> EccModel:
    """Ensemble of classifier chains with independent random label orders."""
    if n_chains < 1:
        raise ValueError("n_chains must be >= 1")
    order_rng = np.random.default_rng(derive_seed(seed, "ecc-orders"))
    orders = [tuple(int(v) for v in order_rng.permutation(ds.n_labels))
              for _ in range(n_chains)]

    def fit_one(i):
        return fit_cc(ds, orders[i], base=base, seed=derive_seed(seed, "chain", i),
                      threshold=threshold)

    chains = parallel_map(fit_one, range(n_chains), jobs)
    return EccModel(tuple(chains), threshold, ds.n_labels, ds.n_features)


@dataclass(frozen=True)
class LpModel:
    kind: ClassVar[str] = "LP"
    classifier: SoftmaxModel
    label_count: int
    n_features: int

    @property
    def labelsets(self):
        return self.classifier.class_labels

    def predict(self, x):
        X, single = _rows(x, self.n_features, "LP")
        dist = predict_dist(self.classifier, X)
        table = np.array(self.labelsets, dtype=np.int8)
        pred = table[np.argmax(dist, axis=1)]
        return _maybe_row(pred, single)


def fit_lp(ds: Dataset, base=BaseConfig(), seed=0) -> LpModel:
    """Label powerset over the labelsets observed in training (never 2^L)."""
    labelsets = [tuple(int(v) for v in row) for row in ds.labels]
    clf = fit_softmax(ds.features, labelsets, l2=base.l2, epochs=base.epochs,
                      rate=base.rate, seed=derive_seed(seed, "lp"))
    return LpModel(clf, ds.n_labels, ds.n_features)


@dataclass(frozen=True)
class RakelModel:
    kind: ClassVar[str] = "RAKEL"
    subsets: tuple
    members: tuple
    threshold: float
    label_count: int
    n_features: int

    def votes(self, x):
        X, _ = _rows(x, self.n_features, "RAkEL")
        total = np.zeros((X.shape[0], self.label_count))
        counts = np.zeros(self.label_count, dtype=np.int64)
        for subset, member in zip(self.subsets, self.members):
            pred = member.predict(X)
            total[:, list(subset)] += pred
            counts[list(subset)] += 1
        return VoteMatrix(total, counts)

    def predict(self, x):
        X, single = _rows(x, self.n_features, "RAkEL")
        frac = self.votes(X).fractions()
        return _maybe_row((frac >= self.threshold).astype(np.int8), single)


def _sample_subsets(rng, n_labels, k, m):
    n_distinct = math.comb(n_labels, k)
    subsets = []
    if m <= n_distinct:
        seen = set()
        while len(subsets) < m:
            cand = tuple(sorted(int(v) for v in rng.choice(n_labels, size=k, replace=False)))
            if cand not in seen:
                seen.add(cand)
                subsets.append(cand)
    else:
        for _ in range(m):
            subsets.append(tuple(sorted(int(v) for v in
                                        rng.choice(n_labels, size=k, replace=False))))
    return subsets


def fit_rakel(ds: Dataset, k=3, m=None, base=BaseConfig(), seed=0, threshold=0.5,
              jobs=1) -> RakelModel:
    """Random k-labelsets: m LP members over random label subsets, votes
    averaged per label. m defaults to 2L. Subsets are distinct while the
    label space allows it."""
    L = ds.n_labels
    if k > L or k < 1:
        raise ValueError(f"subset size k={k} invalid for L={L}")
    if m is None:
        m = 2 * L
    if m < 1:
        raise ValueError("ensemble size m must be >= 1")
    rng = np.random.default_rng(derive_seed(seed, "rakel-subsets"))
    subsets = _sample_subsets(rng, L, k, m)
    covered = set()
    for s in subsets:
        covered.update(s)
    missing = sorted(set(range(L)) - covered)
    if missing:
        warnings.warn(f"labels {missing} appear in no subset and will always "
                      f"be predicted 0", stacklevel=2)

    def fit_one(i):
        subset = subsets[i]
        sub_ds = Dataset(ds.name, ds.features, ds.labels[:, list(subset)],
                         ds.feature_names, tuple(ds.label_names[j] for j in subset))
        return fit_lp(sub_ds, base=base, seed=derive_seed(seed, "subset", i))

    members = parallel_map(fit_one, range(m), jobs)
    return RakelModel(tuple(subsets), tuple(members), threshold, L, ds.n_features)


@dataclass(frozen=True)
class FwModel:
    kind: ClassVar[str] = "FW"
    pairs: tuple
    members: tuple
    threshold: float
    label_count: int
    n_features: int

    def votes(self, x):
        X, _ = _rows(x, self.n_features, "FW")
        total = np.zeros((X.shape[0], self.label_count))
        for (j, k), member in zip(self.pairs, self.members):
            dist = predict_dist(member, X)
            ids = np.array(member.class_labels)
            picked = ids[np.argmax(dist, axis=1)]
            total[:, j] += (picked >> 1) & 1
            total[:, k] += picked & 1
        counts = np.full(self.label_count, self.label_count - 1, dtype=np.int64)
        return VoteMatrix(total, counts)

    def predict(self, x):
        X, single = _rows(x, self.n_features, "FW")
        frac = self.votes(X).fractions()
        return _maybe_row((frac >= self.threshold).astype(np.int8), single)


def fit_fw(ds: Dataset, base=BaseConfig(), seed=0, threshold=0.5, jobs=1) -> FwModel:
    """Four-class pairwise transform: classes {00,01,10,11} per label pair,
    decoded by per-label voting over the L-1 pairs touching each label."""
    L = ds.n_labels
    if L < 2:
        raise ValueError("FW needs at least two labels")
    pairs = [(j, k) for j in range(L) for k in range(j + 1, L)]
    Y = ds.labels

    def fit_one(idx):
        j, k = pairs[idx]
        ids = (2 * Y[:, j] + Y[:, k]).astype(int).tolist()
        return fit_softmax(ds.features, ids, l2=base.l2, epochs=base.epochs,
                           rate=base.rate, seed=derive_seed(seed, "pair", idx))

    members = parallel_map(fit_one, range(len(pairs)), jobs)
    return FwModel(tuple(pairs), tuple(members), threshold, L, ds.n_features)


# ---------------------------------------------------------------------------
# Prediction heads over learned feature spaces
# ---------------------------------------------------------------------------

def extract_features(extractor, X):
    """Top-layer deterministic features from an RBM or a DBN stack."""
    if isinstance(extractor, Rbm):
        return rbm_transform(extractor, X)
    if isinstance(extractor, DbnStack):
        acts = dbn_forward(extractor, X)
        return acts[len(extractor.layers) - 1]
    raise TypeError(f"unsupported extractor type {type(extractor).__name__}")


@dataclass(frozen=True)
class FeatureStackModel:
    """Transform-then-predict composition of an extractor and an inner model."""

    extractor: object
    inner: object

    @property
    def kind(self):
        return f"{self.inner.kind}_R"

    @property
    def label_count(self):
        return self.inner.label_count

    @property
    def threshold(self):
        return getattr(self.inner, "threshold", None)

    def predict(self, x):
        return self.inner.predict(extract_features(self.extractor, x))


def wrap_with_features(inner_fit, extractor):
    """Lift a fit function onto an extractor's feature space.

    The extractor must have been trained (unsupervised) on the same
    training features the wrapped fit will see.
    """
    def fit(ds: Dataset, **kwargs):
        Z = extract_features(extractor, ds.features)
        inner = inner_fit(ds.with_features(Z), **kwargs)
        return FeatureStackModel(extractor, inner)

    return fit


@dataclass(frozen=True)
class DbnLabelModel:
    """Fine-tuned DBN with a label output layer, exposed as a multi-label
    predictor."""

    kind: ClassVar[str] = "DBN_BP"
    stack: DbnStack
    threshold: float

    @property
    def label_count(self):
        return self.stack.n_labels

    @property
    def n_features(self):
        return self.stack.n_visible

    def predict(self, x):
        return predict_labels(self.stack, x, self.threshold)


def predict(model, x):
    """Uniform entry point: every model kind maps features to {0,1}^L."""
    return model.predict(x)


# ---------------------------------------------------------------------------
# JSON serialization for the linear-family models (extractors and DBN heads
# are persisted in their binary containers by the bundle layer)
# ---------------------------------------------------------------------------

def model_to_json_dict(model) -> dict:
    if isinstance(model, BrModel):
        return {"kind": "BR", "threshold": model.threshold,
                "label_count": model.label_count, "n_features": model.n_features,
                "models": [logistic_to_json_dict(m) for m in model.models]}
    if isinstance(model, CcModel):
        return {"kind": "CC", "order": list(model.order), "threshold": model.threshold,
                "label_count": model.label_count, "n_features": model.n_features,
                "models": [logistic_to_json_dict(m) for m in model.models]}
    if isinstance(model, EccModel):
        return {"kind": "ECC", "threshold": model.threshold,
                "label_count": model.label_count, "n_features": model.n_features,
                "chains": [model_to_json_dict(c) for c in model.chains]}
    if isinstance(model, LpModel):
        return {"kind": "LP", "label_count": model.label_count,
                "n_features": model.n_features,
                "classifier": softmax_to_json_dict(model.classifier)}
    if isinstance(model, RakelModel):
        return {"kind": "RAKEL", "subsets": [list(s) for s in model.subsets],
                "threshold": model.threshold, "label_count": model.label_count,
                "n_features": model.n_features,
                "members": [model_to_json_dict(m) for m in model.members]}
    if isinstance(model, FwModel):
        return {"kind": "FW", "pairs": [list(p) for p in model.pairs],
                "threshold": model.threshold, "label_count": model.label_count,
                "n_features": model.n_features,
                "members": [softmax_to_json_dict(m) for m in model.members]}
    raise TypeError(f"cannot serialize model type {type(model).__name__} to JSON")


def model_from_json_dict(d):
    kind = d["kind"]
    if kind == "BR":
        return BrModel(tuple(logistic_from_json_dict(m) for m in d["models"]),
                       d["threshold"], d["label_count"], d["n_features"])
    if kind == "CC":
        return CcModel(tuple(d["order"]),
                       tuple(logistic_from_json_dict(m) for m in d["models"]),
                       d["threshold"], d["label_count"], d["n_features"])
    if kind == "ECC":
        return EccModel(tuple(model_from_json_dict(c) for c in d["chains"]),
                        d["threshold"], d["label_count"], d["n_features"])
    if kind == "LP":
        return LpModel(softmax_from_json_dict(d["classifier"]),
                       d["label_count"], d["n_features"])
    if kind == "RAKEL":
        return RakelModel(tuple(tuple(s) for s in d["subsets"]),
                          tuple(model_from_json_dict(m) for m in d["members"]),
                          d["threshold"], d["label_count"], d["n_features"])
    if kind == "FW":
        return FwModel(tuple(tuple(p) for p in d["pairs"]),
                       tuple(softmax_from_json_dict(m) for m in d["members"]),
                       d["threshold"], d["label_count"], d["n_features"])
    raise ValueError(f"unknown model kind {kind!r}")
