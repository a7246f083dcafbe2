"""Independent oracles and fixture generators for the test suite.

Everything in here is deliberately written with plain loops and explicit
set/probability arithmetic, independent of the library code paths it is
used to check.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


# ---------------------------------------------------------------------------
# Multi-label metric oracles (set-based, per instance)
# ---------------------------------------------------------------------------

def jaccard_oracle(Y, Yhat):
    """Mean per-instance Jaccard of label sets; empty vs empty counts as 1.

    Aggregated with an exactly-rounded sum, so the mean is independent of
    the order in which instances are visited.
    """
    scores = []
    for yr, pr in zip(Y, Yhat):
        true_set = {j for j, v in enumerate(yr) if v == 1}
        pred_set = {j for j, v in enumerate(pr) if v == 1}
        union = true_set | pred_set
        scores.append(len(true_set & pred_set) / len(union) if union else 1.0)
    return math.fsum(scores) / len(scores)


def hamming_oracle(Y, Yhat):
    disagreements = 0
    n, L = len(Y), len(Y[0])
    for yr, pr in zip(Y, Yhat):
        for a, b in zip(yr, pr):
            disagreements += int(a != b)
    return disagreements / (n * L)


# ---------------------------------------------------------------------------
# RBM oracles by brute-force enumeration (feasible only for tiny models)
# ---------------------------------------------------------------------------

def binary_states(n):
    return [np.array(bits, dtype=float) for bits in itertools.product((0.0, 1.0), repeat=n)]


def oracle_energy(W, b_vis, b_hid, x, z):
    d, u = W.shape
    e = 0.0
    for j in range(d):
        for k in range(u):
            e -= x[j] * W[j, k] * z[k]
    for j in range(d):
        e -= b_vis[j] * x[j]
    for k in range(u):
        e -= b_hid[k] * z[k]
    return e


def oracle_partition(W, b_vis, b_hid):
    d, u = W.shape
    total = 0.0
    for x in binary_states(d):
        for z in binary_states(u):
            total += math.exp(-oracle_energy(W, b_vis, b_hid, x, z))
    return total


def oracle_hidden_conditional(W, b_vis, b_hid, x):
    """P(z_k = 1 | x) for each k, from the unnormalized joint."""
    u = W.shape[1]
    num = np.zeros(u)
    den = 0.0
    for z in binary_states(u):
        w = math.exp(-oracle_energy(W, b_vis, b_hid, x, z))
        den += w
        num += w * z
    return num / den


def oracle_visible_conditional(W, b_vis, b_hid, z):
    d = W.shape[0]
    num = np.zeros(d)
    den = 0.0
    for x in binary_states(d):
        w = math.exp(-oracle_energy(W, b_vis, b_hid, x, z))
        den += w
        num += w * x
    return num / den


def oracle_mean_log_likelihood(W, b_vis, b_hid, X):
    logZ = math.log(oracle_partition(W, b_vis, b_hid))
    total = 0.0
    for x in X:
        s = 0.0
        for z in binary_states(W.shape[1]):
            s += math.exp(-oracle_energy(W, b_vis, b_hid, x, z))
        total += math.log(s) - logZ
    return total / len(X)


def oracle_ll_grad_W(W, b_vis, b_hid, X):
    """Exact gradient of the mean log likelihood w.r.t. W.

    d/dW_jk = E_data[x_j P(z_k=1|x)] - E_model[x_j z_k].
    """
    d, u = W.shape
    data_term = np.zeros((d, u))
    for x in X:
        p = oracle_hidden_conditional(W, b_vis, b_hid, x)
        data_term += np.outer(x, p)
    data_term /= len(X)

    model_term = np.zeros((d, u))
    Z = oracle_partition(W, b_vis, b_hid)
    for x in binary_states(d):
        for z in binary_states(u):
            w = math.exp(-oracle_energy(W, b_vis, b_hid, x, z)) / Z
            model_term += w * np.outer(x, z)
    return data_term - model_term


# ---------------------------------------------------------------------------
# Finite-difference gradient oracle
# ---------------------------------------------------------------------------

def finite_difference(loss_fn, params, step=1e-5):
    """Central-difference gradient of loss_fn over a flat parameter vector."""
    params = np.asarray(params, dtype=np.float64)
    grad = np.zeros_like(params)
    for i in range(params.size):
        bumped = params.copy()
        bumped[i] += step
        up = loss_fn(bumped)
        bumped[i] -= 2 * step
        down = loss_fn(bumped)
        grad[i] = (up - down) / (2 * step)
    return grad


def relative_error(a, b):
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    denom = np.linalg.norm(a) + np.linalg.norm(b) + 1e-12
    return np.linalg.norm(a - b) / denom


# ---------------------------------------------------------------------------
# Synthetic dataset generators with known structure
# ---------------------------------------------------------------------------

def two_cluster_features(n_per_cluster=4):
    """Binary 6-d data concentrated on two complementary prototypes."""
    a = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
    b = 1.0 - a
    return np.array([a] * n_per_cluster + [b] * n_per_cluster)


def independent_labels_data(rng, n=200, per_label_features=2, n_labels=3, margin=0.2):
    """Each label depends on its own disjoint block of features, linearly
    separable with a margin band excluded."""
    d = per_label_features * n_labels
    cut = per_label_features / 2
    rows = []
    while len(rows) < n:
        x = rng.random(d)
        ok = True
        for j in range(n_labels):
            block_sum = x[j * per_label_features:(j + 1) * per_label_features].sum()
            if abs(block_sum - cut) < margin:
                ok = False
                break
        if ok:
            rows.append(x)
    X = np.array(rows)
    Y = np.zeros((n, n_labels), dtype=np.int8)
    for j in range(n_labels):
        block = X[:, j * per_label_features:(j + 1) * per_label_features]
        Y[:, j] = (block.sum(axis=1) > cut).astype(np.int8)
    return X, Y


def one_hot_memorization_data(n_corners=4, repeats=3):
    """Distinct one-hot corners, each owning one labelset; a linear model
    can memorize this exactly."""
    X = np.repeat(np.eye(n_corners), repeats, axis=0)
    patterns = np.array([[0, 0], [0, 1], [1, 0], [1, 1]][:n_corners], dtype=np.int8)
    Y = np.repeat(patterns, repeats, axis=0)
    return X, Y


def and_coupled_labels_data(rng, n=400):
    """Two labels where the second is the first AND a feature threshold.

    y0 = [x0 > 0.5] is linearly learnable from x alone. y1 = y0 AND
    [x1 > 0.5] is a corner region, hard for a linear model on x but
    exactly linear once y0 is available as an input feature (bounded
    features make the AND separable). Chain classifiers should beat
    independent per-label models here.
    """
    X = rng.random((n, 3))
    y0 = (X[:, 0] > 0.5).astype(np.int8)
    y1 = (y0 & (X[:, 1] > 0.5)).astype(np.int8)
    return X, np.column_stack([y0, y1])


def random_learnable_multilabel(rng, n=50, d=5, n_labels=4):
    """Random linear label rules over random features; no special structure."""
    X = rng.random((n, d))
    W = rng.standard_normal((d, n_labels))
    cut = np.median(X @ W, axis=0)
    Y = (X @ W > cut).astype(np.int8)
    return X, Y


def latent_cluster_data(rng, n=120, d=24, n_labels=3, flip=0.12):
    """Features are noisy copies of 2^L cluster prototypes; the labels are
    the bits of the latent cluster id. Unsupervised feature learning can
    discover the clusters, which is exactly what pretraining should buy."""
    protos = (rng.random((2 ** n_labels, d)) < 0.5).astype(float)
    z = rng.integers(0, 2 ** n_labels, n)
    X = protos[z].copy()
    flips = rng.random((n, d)) < flip
    X[flips] = 1.0 - X[flips]
    Y = ((z[:, None] >> np.arange(n_labels)) & 1).astype(np.int8)
    return X, Y
