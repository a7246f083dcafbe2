"""Deep belief networks for multi-label prediction.

Greedy layer-wise RBM pretraining, a deterministic sigmoid forward pass,
and two ways to predict labels: hand the top-layer features to an external
multi-label classifier, or attach a label output layer and fine-tune all
weights with back-propagation on the per-label error y - yhat. A
random-initialization twin of the fine-tuned network (no pretraining)
serves as the contrast baseline.
"""

from __future__ import annotations

import json
import struct
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionMismatch, ModelStateError, TrainingError, ValidationError
from .rbm import Rbm, RbmHyper, cd_train, rbm_from_bytes, rbm_to_bytes, transform
from .util import derive_seed, sigmoid

_MAGIC = b"MLDBN1"


@dataclass(frozen=True)
class DbnStack:
    """Ordered RBM layers plus an optional supervised output layer."""

    layers: tuple
    output_weights: np.ndarray = None
    output_bias: np.ndarray = None

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ValidationError("a stack needs at least one layer")
        for lower, upper in zip(layers, layers[1:]):
            if lower.n_hidden != upper.n_visible:
                raise DimensionMismatch(
                    f"layer width {lower.n_hidden} does not feed layer input {upper.n_visible}")
        has_w = self.output_weights is not None
        has_b = self.output_bias is not None
        if has_w != has_b:
            raise ValidationError("output layer needs both weights and bias")
        if has_w:
            W = np.ascontiguousarray(np.asarray(self.output_weights, dtype=np.float64))
            b = np.ascontiguousarray(np.asarray(self.output_bias, dtype=np.float64))
            if W.ndim != 2 or W.shape[0] != layers[-1].n_hidden or b.shape != (W.shape[1],):
                raise DimensionMismatch("output layer shape does not match the top layer")
            W.setflags(write=False)
            b.setflags(write=False)
            object.__setattr__(self, "output_weights", W)
            object.__setattr__(self, "output_bias", b)
        object.__setattr__(self, "layers", layers)

    @property
    def has_output(self):
        return self.output_weights is not None

    @property
    def n_visible(self):
        return self.layers[0].n_visible

    @property
    def top_width(self):
        return self.layers[-1].n_hidden

    @property
    def n_labels(self):
        if not self.has_output:
            raise ModelStateError("stack has no output layer")
        return self.output_weights.shape[1]


@dataclass(frozen=True)
class BpHyper:
    """Back-propagation fine-tuning settings.

    Fine-tuning for much more than 100 epochs overfits quickly from an RBM
    initialization, hence the low default and the optional early stop on a
    held-out slice of the training data.
    """

    bp_epochs: int = 100
    bp_learning_rate: float = 0.1
    threshold: float = 0.5
    early_stop: bool = False
    early_stop_fraction: float = 0.1
    patience: int = 5

    def __post_init__(self):
        if self.bp_epochs < 0 or self.bp_learning_rate < 0:
            raise ValueError("bp_epochs and bp_learning_rate must be >= 0")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must be in (0,1)")
        if self.early_stop and not 0.0 < self.early_stop_fraction < 0.5:
            raise ValueError("early_stop_fraction must be in (0, 0.5)")


def greedy_pretrain(features, layer_sizes, hyper: RbmHyper, seed, progress=None) -> DbnStack:
    """Stack RBMs greedily: layer i trains on layer i-1's probability outputs.

    The first layer reuses the caller's seed directly, so a one-element
    layer_sizes is exactly a single cd_train run.
    """
    if not layer_sizes:
        raise ValueError("layer_sizes must be non-empty")
    X = np.asarray(features, dtype=np.float64)
    layers = []
    for i, width in enumerate(layer_sizes):
        layer_seed = seed if i == 0 else derive_seed(seed, "dbn-layer", i)
        layer_hyper = replace(hyper, n_hidden=int(width))
        cb = None
        if progress is not None:
            cb = lambda layer=i, **kv: progress(layer=layer, **kv)
        rbm, _ = cd_train(X, layer_hyper, layer_seed, progress=cb)
        layers.append(rbm)
        X = transform(rbm, X)
    return DbnStack(tuple(layers))


def _params(stack: DbnStack):
    """Feedforward view: [(W, b), ...] per hidden layer, then the output pair."""
    params = [(layer.W.copy(), layer.b_hid.copy()) for layer in stack.layers]
    if stack.has_output:
        params.append((stack.output_weights.copy(), stack.output_bias.copy()))
    return params


def _rebuild(stack: DbnStack, params) -> DbnStack:
    n = len(stack.layers)
    layers = tuple(
        Rbm(params[i][0], stack.layers[i].b_vis, params[i][1], stack.layers[i].rng_seed)
        for i in range(n))
    if stack.has_output:
        return DbnStack(layers, params[n][0], params[n][1])
    return DbnStack(layers)


def _forward_params(params, X):
    acts = []
    a = X
    for W, b in params:
        a = sigmoid(a @ W + b)
        acts.append(a)
    return acts


def forward(stack: DbnStack, x):
    """Activations per layer (probabilities); the last entry is the label
    activation when an output layer is present. Pure and deterministic."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != stack.n_visible:
        raise DimensionMismatch(
            f"input has {x.shape[-1]} features, stack expects {stack.n_visible}")
    return _forward_params(_params(stack), x)


def loss_and_grads(stack: DbnStack, X, Y):
    """Half squared error summed over instances and labels, with gradients
    for every weight matrix and bias in feedforward order.

    This is the same math the per-instance SGD in attach_and_finetune
    applies: output delta (yhat - y) * yhat * (1 - yhat), propagated back
    through the sigmoid layers.
    """
    if not stack.has_output:
        raise ModelStateError("fine-tuning loss needs an output layer")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    params = _params(stack)
    acts = _forward_params(params, X)
    yhat = acts[-1]
    loss = 0.5 * float(((Y - yhat) ** 2).sum())
    grads = [None] * len(params)
    delta = (yhat - Y) * yhat * (1.0 - yhat)
    for i in range(len(params) - 1, -1, -1):
        below = X if i == 0 else acts[i - 1]
        grads[i] = (below.T @ delta, delta.sum(axis=0))
        if i > 0:
            delta = (delta @ params[i][0].T) * below * (1.0 - below)
    return loss, grads


def _sgd_finetune(params, X, Y, hyper: BpHyper, rng):
    """In-place per-instance SGD, shuffled each epoch; returns epochs run."""
    n = X.shape[0]
    if hyper.early_stop and n >= 4:
        n_val = max(1, int(hyper.early_stop_fraction * n))
        val_rows = rng.permutation(n)[:n_val]
        train_rows = np.setdiff1d(np.arange(n), val_rows)
    else:
        val_rows = None
        train_rows = np.arange(n)

    def set_loss(rows):
        acts = _forward_params(params, X[rows])
        return 0.5 * float(((Y[rows] - acts[-1]) ** 2).sum())

    best_val = np.inf
    stale = 0
    epochs_run = 0
    for _ in range(hyper.bp_epochs):
        for idx in rng.permutation(train_rows):
            x_row = X[idx:idx + 1]
            acts = _forward_params(params, x_row)
            delta = (acts[-1] - Y[idx:idx + 1]) * acts[-1] * (1.0 - acts[-1])
            for i in range(len(params) - 1, -1, -1):
                below = x_row if i == 0 else acts[i - 1]
                W, b = params[i]
                if i > 0:
                    delta_next = (delta @ W.T) * below * (1.0 - below)
                W -= hyper.bp_learning_rate * (below.T @ delta)
                b -= hyper.bp_learning_rate * delta[0]
                if i > 0:
                    delta = delta_next
        epochs_run += 1
        for W, b in params:
            if not (np.isfinite(W).all() and np.isfinite(b).all()):
                raise TrainingError("back-propagation diverged", epoch=epochs_run - 1)
        if val_rows is not None:
            val_loss = set_loss(val_rows)
            if val_loss < best_val - 1e-12:
                best_val = val_loss
                stale = 0
            else:
                stale += 1
                if stale >= hyper.patience:
                    break
    return epochs_run


def attach_and_finetune(stack: DbnStack, ds, hyper: BpHyper, seed) -> DbnStack:
    """Attach a label output layer (small Gaussian init) and fine-tune all
    weights by per-instance SGD on the squared label error.

    Expects ds.features already scaled like the pretraining inputs.
    Deterministic for a fixed seed.
    """
    X = np.asarray(ds.features, dtype=np.float64)
    Y = np.asarray(ds.labels, dtype=np.float64)
    if X.shape[1] != stack.n_visible:
        raise DimensionMismatch(
            f"dataset has {X.shape[1]} features, stack expects {stack.n_visible}")
    if hyper.bp_epochs > 100 and not hyper.early_stop:
        warnings.warn("fine-tuning beyond ~100 epochs tends to overfit; "
                      "consider early_stop", stacklevel=2)
    rng = np.random.default_rng(derive_seed(seed, "finetune"))
    out_W = rng.normal(0.0, 0.01, size=(stack.top_width, Y.shape[1]))
    out_b = np.zeros(Y.shape[1])
    with_output = DbnStack(stack.layers, out_W, out_b)
    if hyper.bp_epochs == 0:
        return with_output
    params = _params(with_output)
    _sgd_finetune(params, X, Y, hyper, rng)
    return _rebuild(with_output, params)


def bpmll_baseline(ds, layer_sizes, hyper: BpHyper, seed) -> DbnStack:
    """Same network and fine-tuning as attach_and_finetune, but every layer
    is randomly initialized instead of RBM-pretrained."""
    d = ds.n_features
    rng = np.random.default_rng(derive_seed(seed, "random-init"))
    dims = [d] + [int(w) for w in layer_sizes]
    layers = []
    for i in range(len(layer_sizes)):
        W = rng.normal(0.0, 0.01, size=(dims[i], dims[i + 1]))
        layers.append(Rbm(W, np.zeros(dims[i]), np.zeros(dims[i + 1]), rng_seed=seed))
    return attach_and_finetune(DbnStack(tuple(layers)), ds, hyper, seed)


def predict_labels(stack: DbnStack, x, threshold=0.5):
    """Binary labels: final activation >= threshold maps to 1."""
    if not stack.has_output:
        raise ModelStateError("predict_labels needs a stack with an output layer")
    acts = forward(stack, x)
    return (acts[-1] >= threshold).astype(np.int8)


# ---------------------------------------------------------------------------
# Persistence: one container (JSON manifest + per-layer RBM blocks + output)
# ---------------------------------------------------------------------------

def stack_to_bytes(stack: DbnStack) -> bytes:
    manifest = {
        "version": 1,
        "layer_dims": [[layer.n_visible, layer.n_hidden] for layer in stack.layers],
        "has_output": stack.has_output,
        "output_shape": list(stack.output_weights.shape) if stack.has_output else None,
    }
    head = json.dumps(manifest, sort_keys=True).encode("utf-8")
    out = [_MAGIC, struct.pack("<q", len(head)), head]
    for layer in stack.layers:
        blob = rbm_to_bytes(layer)
        out.append(struct.pack("<q", len(blob)))
        out.append(blob)
    if stack.has_output:
        out.append(stack.output_weights.astype("<f8").tobytes("C"))
        out.append(stack.output_bias.astype("<f8").tobytes("C"))
    return b"".join(out)


def stack_from_bytes(blob: bytes) -> DbnStack:
    if blob[:6] != _MAGIC:
        raise ValidationError("not a DBN container (bad magic bytes)")
    (head_len,) = struct.unpack("<q", blob[6:14])
    manifest = json.loads(blob[14:14 + head_len].decode("utf-8"))
    off = 14 + head_len
    layers = []
    for _ in manifest["layer_dims"]:
        (blen,) = struct.unpack("<q", blob[off:off + 8])
        off += 8
        layers.append(rbm_from_bytes(blob[off:off + blen]))
        off += blen
    if manifest["has_output"]:
        rows, cols = manifest["output_shape"]
        W = np.frombuffer(blob, dtype="<f8", count=rows * cols, offset=off).reshape(rows, cols)
        off += 8 * rows * cols
        b = np.frombuffer(blob, dtype="<f8", count=cols, offset=off)
        return DbnStack(tuple(layers), W.copy(), b.copy())
    return DbnStack(tuple(layers))


def save_stack(stack: DbnStack, path):
    with open(path, "wb") as fh:
        fh.write(stack_to_bytes(stack))


def load_stack(path) -> DbnStack:
    with open(path, "rb") as fh:
        return stack_from_bytes(fh.read())
