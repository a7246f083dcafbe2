"""Multi-label evaluation metrics.

The headline metric is the per-instance Jaccard index of the true and
predicted labelsets (|y AND yhat| / |y OR yhat|), averaged over instances;
an instance whose true and predicted sets are both empty scores 1, a
convention every report that uses these numbers documents. Hamming loss
and exact match ride along as diagnostics for degenerate predictors.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DimensionMismatch, ValidationError


def _check_pair(Y, Yhat):
    Y = np.atleast_2d(np.asarray(Y))
    Yhat = np.atleast_2d(np.asarray(Yhat))
    if Y.shape != Yhat.shape:
        raise DimensionMismatch(f"label matrices differ in shape: {Y.shape} vs {Yhat.shape}")
    if not np.isin(Y, (0, 1)).all() or not np.isin(Yhat, (0, 1)).all():
        raise ValidationError("metric inputs must be binary matrices")
    return Y.astype(np.int8), Yhat.astype(np.int8)


def accuracy(Y, Yhat) -> float:
    """Mean per-instance Jaccard; empty-vs-empty rows count as 1.0.

    The aggregate uses an exactly-rounded sum so the value does not depend
    on summation order.
    """
    Y, Yhat = _check_pair(Y, Yhat)
    inter = (Y & Yhat).sum(axis=1).astype(np.float64)
    union = (Y | Yhat).sum(axis=1).astype(np.float64)
    per_instance = np.where(union > 0, inter / np.where(union > 0, union, 1.0), 1.0)
    return math.fsum(per_instance) / len(per_instance)


def hamming_loss(Y, Yhat) -> float:
    """Fraction of disagreeing label bits over N*L."""
    Y, Yhat = _check_pair(Y, Yhat)
    return float((Y != Yhat).mean())


def exact_match(Y, Yhat) -> float:
    """Fraction of instances whose entire labelset is predicted exactly."""
    Y, Yhat = _check_pair(Y, Yhat)
    return float((Y == Yhat).all(axis=1).mean())


@dataclass(frozen=True)
class MetricSet:
    accuracy: float
    hamming_loss: float
    exact_match: float
    n_test: int

    def to_json_dict(self):
        return asdict(self)


def evaluate_predictions(Y, Yhat) -> MetricSet:
    Y, Yhat = _check_pair(Y, Yhat)
    return MetricSet(accuracy(Y, Yhat), hamming_loss(Y, Yhat), exact_match(Y, Yhat),
                     int(Y.shape[0]))
