"""Self-contained base classifiers: binary logistic and K-class softmax
regression, fit by full-batch gradient descent with step halving.

These are deliberately simple and deterministic: zero-initialized weights,
a fixed epoch budget, and the learning rate halved (with the step undone)
whenever a step would increase the regularized loss.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .util import sigmoid

_EPS = 1e-12


@dataclass(frozen=True)
class LogisticModel:
    """Binary classifier; weights has length d+1 with the bias folded in last."""

    weights: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        w = np.ascontiguousarray(np.asarray(self.weights, dtype=np.float64))
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class SoftmaxModel:
    """K-class classifier over opaque class labels; weights is K x (d+1)."""

    weights: np.ndarray
    class_labels: tuple

    def __post_init__(self):
        w = np.ascontiguousarray(np.asarray(self.weights, dtype=np.float64))
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "class_labels", tuple(self.class_labels))
        if w.shape[0] != len(self.class_labels):
            raise DimensionMismatch("one weight row per class label required")


def _with_bias(X):
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return np.hstack([X, np.ones((X.shape[0], 1))])


def logistic_loss_grad(weights, Xb, y, l2):
    """Regularized mean NLL and its gradient; Xb already carries the bias column."""
    p = sigmoid(Xb @ weights)
    p = np.clip(p, _EPS, 1.0 - _EPS)
    loss = -np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)) \
        + 0.5 * l2 * float(weights @ weights)
    grad = Xb.T @ (p - y) / Xb.shape[0] + l2 * weights
    return loss, grad


def _descend(weights, loss_grad, epochs, rate):
    """Gradient descent with step halving on any loss increase."""
    loss, grad = loss_grad(weights)
    for _ in range(epochs):
        candidate = weights - rate * grad
        new_loss, new_grad = loss_grad(candidate)
        if new_loss > loss:
            rate *= 0.5
            continue
        weights, loss, grad = candidate, new_loss, new_grad
    return weights


def fit_logistic(X, y, l2=1e-4, epochs=500, rate=0.1, seed=0) -> LogisticModel:
    """Fit binary logistic regression; y is a 0/1 vector.

    A single-class target yields a constant-probability prior model
    (clamped to [0.01, 0.99]) flagged as degenerate. The seed is accepted
    for interface uniformity; the zero-initialized full-batch descent is
    deterministic without it.
    """
    Xb = _with_bias(X)
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.shape[0] != Xb.shape[0]:
        raise DimensionMismatch("X and y row counts differ")
    classes = np.unique(y)
    if classes.size < 2:
        prior = float(np.clip(y.mean(), 0.01, 0.99))
        w = np.zeros(Xb.shape[1])
        w[-1] = np.log(prior / (1.0 - prior))
        return LogisticModel(w, degenerate=True)
    w = np.zeros(Xb.shape[1])
    w = _descend(w, lambda wt: logistic_loss_grad(wt, Xb, y, l2), epochs, rate)
    return LogisticModel(w)


def predict_prob(model: LogisticModel, x):
    """P(y=1 | x); accepts a single vector or an N x d matrix."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    Xb = _with_bias(x)
    if Xb.shape[1] != model.weights.shape[0]:
        raise DimensionMismatch(
            f"model expects {model.weights.shape[0] - 1} features, got {Xb.shape[1] - 1}")
    p = sigmoid(Xb @ model.weights)
    return float(p[0]) if single else p


def softmax_loss_grad(weights, Xb, class_idx, l2):
    """Mean cross-entropy over K classes plus L2; weights is K x (d+1)."""
    n, k = Xb.shape[0], weights.shape[0]
    scores = Xb @ weights.T
    scores -= scores.max(axis=1, keepdims=True)
    expd = np.exp(scores)
    probs = expd / expd.sum(axis=1, keepdims=True)
    picked = np.clip(probs[np.arange(n), class_idx], _EPS, None)
    loss = -np.mean(np.log(picked)) + 0.5 * l2 * float((weights * weights).sum())
    onehot = np.zeros((n, k))
    onehot[np.arange(n), class_idx] = 1.0
    grad = (probs - onehot).T @ Xb / n + l2 * weights
    return loss, grad


def fit_softmax(X, y, l2=1e-4, epochs=500, rate=0.1, seed=0) -> SoftmaxModel:
    """Fit softmax regression over the distinct values of y (opaque ids).

    Class order is the sorted order of the observed ids, making the fit
    deterministic. Zero initialization means an untrained model predicts
    the uniform distribution.
    """
    Xb = _with_bias(X)
    ids = list(y)
    if len(ids) != Xb.shape[0]:
        raise DimensionMismatch("X and y row counts differ")
    class_labels = tuple(sorted(set(ids)))
    index = {c: i for i, c in enumerate(class_labels)}
    class_idx = np.array([index[c] for c in ids])
    shape = (len(class_labels), Xb.shape[1])
    weights = np.zeros(shape)
    if len(class_labels) >= 2:
        flat = _descend(weights.ravel(),
                        lambda wt: _softmax_flat(wt, Xb, class_idx, l2, shape),
                        epochs, rate)
        weights = flat.reshape(shape)
    return SoftmaxModel(weights, class_labels)


def _softmax_flat(flat, Xb, class_idx, l2, shape):
    loss, grad = softmax_loss_grad(flat.reshape(shape), Xb, class_idx, l2)
    return loss, grad.ravel()


def predict_dist(model: SoftmaxModel, x):
    """Probability vector over model.class_labels; single vector or matrix."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    Xb = _with_bias(x)
    if Xb.shape[1] != model.weights.shape[1]:
        raise DimensionMismatch(
            f"model expects {model.weights.shape[1] - 1} features, got {Xb.shape[1] - 1}")
    scores = Xb @ model.weights.T
    scores -= scores.max(axis=1, keepdims=True)
    expd = np.exp(scores)
    probs = expd / expd.sum(axis=1, keepdims=True)
    return probs[0] if single else probs


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------

def logistic_to_json_dict(m: LogisticModel) -> dict:
    return {"type": "logistic", "weights": m.weights.tolist(), "degenerate": m.degenerate}


def logistic_from_json_dict(d) -> LogisticModel:
    return LogisticModel(np.array(d["weights"], dtype=np.float64), bool(d["degenerate"]))


def softmax_to_json_dict(m: SoftmaxModel) -> dict:
    # class labels may be ints or tuples of ints (labelsets); JSON-encode as lists
    labels = [list(c) if isinstance(c, tuple) else c for c in m.class_labels]
    return {"type": "softmax", "weights": m.weights.tolist(), "class_labels": labels}


def softmax_from_json_dict(d) -> SoftmaxModel:
    labels = tuple(tuple(c) if isinstance(c, list) else c for c in d["class_labels"])
    return SoftmaxModel(np.array(d["weights"], dtype=np.float64), labels)
