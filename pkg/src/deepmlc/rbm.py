"""Bernoulli-Bernoulli restricted Boltzmann machine.

Energy model with bias terms (zero biases recover the pure -xWz form),
contrastive-divergence training with momentum and weight cost, a
deterministic up-pass feature transform, and an exact log-likelihood for
models small enough to enumerate.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, ModelTooLargeError, TrainingError, ValidationError
from .util import sigmoid

_MAGIC = b"MLRBM1"


@dataclass(frozen=True)
class Rbm:
    """Trained RBM parameters. W is d x u; biases match the two layers."""

    W: np.ndarray
    b_vis: np.ndarray
    b_hid: np.ndarray
    rng_seed: int = 0

    def __post_init__(self):
        W = np.ascontiguousarray(np.asarray(self.W, dtype=np.float64))
        bv = np.ascontiguousarray(np.asarray(self.b_vis, dtype=np.float64))
        bh = np.ascontiguousarray(np.asarray(self.b_hid, dtype=np.float64))
        if W.ndim != 2 or bv.shape != (W.shape[0],) or bh.shape != (W.shape[1],):
            raise DimensionMismatch(
                f"inconsistent RBM shapes: W {W.shape}, b_vis {bv.shape}, b_hid {bh.shape}")
        for arr in (W, bv, bh):
            arr.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b_vis", bv)
        object.__setattr__(self, "b_hid", bh)

    @property
    def n_visible(self):
        return self.W.shape[0]

    @property
    def n_hidden(self):
        return self.W.shape[1]


@dataclass(frozen=True)
class RbmHyper:
    """CD training hyperparameters; weight cost and epochs default to the
    values used throughout the experiments (2e-5, 1000)."""

    n_hidden: int
    learning_rate: float = 0.1
    momentum: float = 0.8
    weight_cost: float = 2e-5
    epochs: int = 1000
    cd_steps: int = 1
    batch_size: int = 100

    def __post_init__(self):
        if self.n_hidden < 1 or self.epochs < 0 or self.cd_steps < 1 or self.batch_size < 1:
            raise ValueError("n_hidden/cd_steps/batch_size must be >= 1, epochs >= 0")
        if self.learning_rate < 0 or not 0 <= self.momentum < 1 or self.weight_cost < 0:
            raise ValueError("learning_rate >= 0, 0 <= momentum < 1, weight_cost >= 0")


@dataclass
class TrainTrace:
    """Per-epoch mean squared one-step reconstruction error."""

    reconstruction_errors: list = field(default_factory=list)


def energy(rbm: Rbm, x, z) -> float:
    """E(x, z) = -x'Wz - b_vis'x - b_hid'z for a single (x, z) pair."""
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != (rbm.n_visible,) or z.shape != (rbm.n_hidden,):
        raise DimensionMismatch(
            f"energy expects x of length {rbm.n_visible} and z of length {rbm.n_hidden}")
    return float(-(x @ rbm.W @ z) - rbm.b_vis @ x - rbm.b_hid @ z)


def hidden_probs(rbm: Rbm, x):
    """P(z_k = 1 | x) = sigmoid(b_hid_k + sum_j x_j W_jk); accepts a vector or matrix."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != rbm.n_visible:
        raise DimensionMismatch(f"expected {rbm.n_visible} visible values, got {x.shape[-1]}")
    return sigmoid(x @ rbm.W + rbm.b_hid)


def visible_probs(rbm: Rbm, z):
    """P(x_j = 1 | z), the mirror conditional through W transposed."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape[-1] != rbm.n_hidden:
        raise DimensionMismatch(f"expected {rbm.n_hidden} hidden values, got {z.shape[-1]}")
    return sigmoid(z @ rbm.W.T + rbm.b_vis)


def transform(rbm: Rbm, x):
    """Deterministic feature transform: the hidden probabilities (not samples)."""
    return hidden_probs(rbm, x)


def _cd_stats(W, b_vis, b_hid, batch, rng, k):
    """One CD-k gradient estimate on a batch, plus the 1-step recon error.

    Positive phase clamps the data and uses hidden probabilities; the
    negative phase alternates sampled hidden states with visible
    probabilities (mean field on the visible side).
    """
    ph_data = sigmoid(batch @ W + b_hid)
    h = (rng.random(ph_data.shape) < ph_data).astype(np.float64)
    recon = None
    for step in range(k):
        v = sigmoid(h @ W.T + b_vis)
        if step == 0:
            recon = v
        ph_model = sigmoid(v @ W + b_hid)
        if step < k - 1:
            h = (rng.random(ph_model.shape) < ph_model).astype(np.float64)
    n = batch.shape[0]
    grad_W = (batch.T @ ph_data - v.T @ ph_model) / n
    grad_bv = (batch - v).mean(axis=0)
    grad_bh = (ph_data - ph_model).mean(axis=0)
    recon_err = float(((batch - recon) ** 2).mean())
    return grad_W, grad_bv, grad_bh, recon_err


def cd_statistics(rbm: Rbm, batch, rng, k=1):
    """Public wrapper over the batch CD estimate, for inspection and tests."""
    batch = np.atleast_2d(np.asarray(batch, dtype=np.float64))
    if batch.shape[1] != rbm.n_visible:
        raise DimensionMismatch(f"batch has {batch.shape[1]} columns, model expects {rbm.n_visible}")
    return _cd_stats(rbm.W, rbm.b_vis, rbm.b_hid, batch, rng, k)


def cd_train(features, hyper: RbmHyper, seed, progress=None):
    """Train an RBM with CD-k on features in [0,1].

    Weights start from seeded N(0, 0.01) draws, biases from zero; updates
    use velocity-style momentum (v <- momentum*v + lr*(grad - cost*W)) and
    mini-batches taken as contiguous slices in input order. Bitwise
    deterministic for a fixed seed, hyperparameters and row order.
    Returns (Rbm, TrainTrace).
    """
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("cd_train needs a non-empty N x d matrix")
    if X.min() < 0.0 or X.max() > 1.0:
        raise ValidationError("cd_train inputs must lie in [0,1]; scale features first")
    n, d = X.shape
    u = hyper.n_hidden
    rng = np.random.default_rng(seed)
    W = rng.normal(0.0, 0.01, size=(d, u))
    b_vis = np.zeros(d)
    b_hid = np.zeros(u)
    vel_W = np.zeros_like(W)
    vel_bv = np.zeros_like(b_vis)
    vel_bh = np.zeros_like(b_hid)
    batch_size = min(hyper.batch_size, n)
    trace = TrainTrace()

    for epoch in range(hyper.epochs):
        err_sum = 0.0
        # overflow here is diagnosed by the post-epoch finiteness check
        with np.errstate(over="ignore", invalid="ignore"):
            for start in range(0, n, batch_size):
                batch = X[start:start + batch_size]
                grad_W, grad_bv, grad_bh, err = _cd_stats(W, b_vis, b_hid, batch, rng,
                                                          hyper.cd_steps)
                vel_W = hyper.momentum * vel_W \
                    + hyper.learning_rate * (grad_W - hyper.weight_cost * W)
                vel_bv = hyper.momentum * vel_bv + hyper.learning_rate * grad_bv
                vel_bh = hyper.momentum * vel_bh + hyper.learning_rate * grad_bh
                W += vel_W
                b_vis += vel_bv
                b_hid += vel_bh
                err_sum += err * batch.shape[0]
        if not (np.isfinite(W).all() and np.isfinite(b_vis).all() and np.isfinite(b_hid).all()):
            raise TrainingError("contrastive divergence diverged to non-finite weights",
                                epoch=epoch)
        trace.reconstruction_errors.append(err_sum / n)
        if progress is not None:
            progress(epoch=epoch, recon_error=trace.reconstruction_errors[-1])

    return Rbm(W, b_vis, b_hid, rng_seed=seed), trace


def exact_log_likelihood(rbm: Rbm, features) -> float:
    """Mean log P(x) by exact enumeration; requires d + u <= 20.

    The hidden sum is computed in closed form per visible configuration;
    the partition function enumerates all binary visible states.
    """
    d, u = rbm.n_visible, rbm.n_hidden
    if d + u > 20:
        raise ModelTooLargeError(f"exact likelihood needs d + u <= 20, got {d + u}")
    X = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if X.shape[1] != d:
        raise DimensionMismatch(f"features have {X.shape[1]} columns, model expects {d}")

    def unnorm_log_px(V):
        act = V @ rbm.W + rbm.b_hid
        return V @ rbm.b_vis + np.logaddexp(0.0, act).sum(axis=1)

    all_vis = ((np.arange(2 ** d)[:, None] >> np.arange(d)) & 1).astype(np.float64)
    scores = unnorm_log_px(all_vis)
    shift = scores.max()
    log_z = shift + np.log(np.exp(scores - shift).sum())
    return float(np.mean(unnorm_log_px(X)) - log_z)


# ---------------------------------------------------------------------------
# Persistence: JSON for small/readable models, flat binary for exactness
# ---------------------------------------------------------------------------

def rbm_to_json_dict(rbm: Rbm) -> dict:
    return {
        "W": rbm.W.tolist(),
        "b_vis": rbm.b_vis.tolist(),
        "b_hid": rbm.b_hid.tolist(),
        "rng_seed": rbm.rng_seed,
    }


def rbm_from_json_dict(d) -> Rbm:
    return Rbm(np.array(d["W"], dtype=np.float64),
               np.array(d["b_vis"], dtype=np.float64),
               np.array(d["b_hid"], dtype=np.float64),
               rng_seed=int(d["rng_seed"]))


def save_rbm_json(rbm: Rbm, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(rbm_to_json_dict(rbm), fh, sort_keys=True)


def load_rbm_json(path) -> Rbm:
    with open(path, encoding="utf-8") as fh:
        return rbm_from_json_dict(json.load(fh))


def rbm_to_bytes(rbm: Rbm) -> bytes:
    """Flat container: magic, dims, seed, then little-endian float64 blocks."""
    head = _MAGIC + struct.pack("<qqq", rbm.n_visible, rbm.n_hidden, rbm.rng_seed)
    body = (rbm.W.astype("<f8").tobytes("C")
            + rbm.b_vis.astype("<f8").tobytes("C")
            + rbm.b_hid.astype("<f8").tobytes("C"))
    return head + body


def rbm_from_bytes(blob: bytes) -> Rbm:
    if blob[:6] != _MAGIC:
        raise ValidationError("not an RBM container (bad magic bytes)")
    d, u, seed = struct.unpack("<qqq", blob[6:30])
    need = 30 + 8 * (d * u + d + u)
    if len(blob) != need:
        raise ValidationError(f"RBM container truncated: {len(blob)} bytes, expected {need}")
    off = 30
    W = np.frombuffer(blob, dtype="<f8", count=d * u, offset=off).reshape(d, u)
    off += 8 * d * u
    bv = np.frombuffer(blob, dtype="<f8", count=d, offset=off)
    off += 8 * d
    bh = np.frombuffer(blob, dtype="<f8", count=u, offset=off)
    return Rbm(W.copy(), bv.copy(), bh.copy(), rng_seed=seed)


def save_rbm(rbm: Rbm, path):
    with open(path, "wb") as fh:
        fh.write(rbm_to_bytes(rbm))


def load_rbm(path) -> Rbm:
    with open(path, "rb") as fh:
        return rbm_from_bytes(fh.read())
