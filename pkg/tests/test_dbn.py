import math

import numpy as np
import pytest

import helpers
from conftest import make_dataset
from deepmlc.data import Dataset
from deepmlc.dbn import (BpHyper, DbnStack, attach_and_finetune, bpmll_baseline,
                         forward, greedy_pretrain, load_stack, loss_and_grads,
                         predict_labels, save_stack, stack_from_bytes,
                         stack_to_bytes)
from deepmlc.errors import DimensionMismatch, ModelStateError, ValidationError
from deepmlc.rbm import Rbm, RbmHyper, cd_train, transform


def sigmoid(v):
    return 1.0 / (1.0 + math.exp(-v))


def random_stack(rng, dims=(4, 3, 2), n_labels=2):
    layers = []
    for a, b in zip(dims, dims[1:]):
        layers.append(Rbm(rng.standard_normal((a, b)) * 0.5, np.zeros(a),
                          rng.standard_normal(b) * 0.1))
    return DbnStack(tuple(layers),
                    rng.standard_normal((dims[-1], n_labels)) * 0.5,
                    rng.standard_normal(n_labels) * 0.1)


def flatten_stack(stack):
    parts = []
    for layer in stack.layers:
        parts += [layer.W.ravel(), layer.b_hid]
    parts += [stack.output_weights.ravel(), stack.output_bias]
    return np.concatenate(parts)


def unflatten_stack(stack, flat):
    layers = []
    off = 0
    for layer in stack.layers:
        n = layer.W.size
        W = flat[off:off + n].reshape(layer.W.shape)
        off += n
        b = flat[off:off + layer.b_hid.size]
        off += layer.b_hid.size
        layers.append(Rbm(W, layer.b_vis, b))
    n = stack.output_weights.size
    W_out = flat[off:off + n].reshape(stack.output_weights.shape)
    off += n
    return DbnStack(tuple(layers), W_out, flat[off:])


class TestGreedyPretrain:
    def test_single_layer_equals_plain_cd_train(self):
        X = helpers.two_cluster_features()
        hyper = RbmHyper(n_hidden=2, epochs=30, learning_rate=0.1, momentum=0.2)
        stack = greedy_pretrain(X, [2], hyper, seed=9)
        direct, _ = cd_train(X, hyper, seed=9)
        assert np.array_equal(stack.layers[0].W, direct.W)
        assert np.array_equal(stack.layers[0].b_hid, direct.b_hid)

    def test_two_layers_chain_dimensions(self, rng):
        X = rng.random((20, 10))
        stack = greedy_pretrain(X, [4, 4], RbmHyper(n_hidden=4, epochs=3), seed=0)
        assert len(stack.layers) == 2
        assert stack.layers[0].W.shape == (10, 4)
        assert stack.layers[1].W.shape == (4, 4)
        assert not stack.has_output

    def test_fifth_of_294_features_gives_59(self, rng):
        width = math.ceil(294 / 5)
        assert width == 59
        X = rng.random((12, 294))
        stack = greedy_pretrain(X, [width, width], RbmHyper(n_hidden=width, epochs=2),
                                seed=0)
        acts = forward(stack, X[0])
        assert acts[-1].shape == (59,)

    def test_empty_layer_sizes_rejected(self, rng):
        with pytest.raises(ValueError):
            greedy_pretrain(rng.random((5, 3)), [], RbmHyper(n_hidden=1, epochs=1), 0)


class TestForward:
    def test_zero_stack_gives_half_everywhere(self):
        layers = (Rbm(np.zeros((3, 2)), np.zeros(3), np.zeros(2)),
                  Rbm(np.zeros((2, 2)), np.zeros(2), np.zeros(2)))
        stack = DbnStack(layers, np.zeros((2, 4)), np.zeros(4))
        acts = forward(stack, np.array([0.1, 0.9, 0.4]))
        for a in acts:
            assert np.allclose(a, 0.5)

    def test_single_layer_forward_equals_transform(self, rng):
        rbm = Rbm(rng.standard_normal((4, 2)), np.zeros(4), rng.standard_normal(2))
        stack = DbnStack((rbm,))
        x = rng.random(4)
        assert np.array_equal(forward(stack, x)[0], transform(rbm, x))

    def test_matches_hand_computed_sigmoid_chain(self):
        W1 = np.array([[1.0, -2.0], [0.5, 0.25]])
        b1 = np.array([0.1, -0.1])
        W2 = np.array([[2.0], [-1.0]])
        b2 = np.array([0.3])
        stack = DbnStack((Rbm(W1, np.zeros(2), b1),), W2, b2)
        x = np.array([0.6, 0.2])
        h1 = sigmoid(0.6 * 1.0 + 0.2 * 0.5 + 0.1)
        h2 = sigmoid(0.6 * -2.0 + 0.2 * 0.25 - 0.1)
        out = sigmoid(h1 * 2.0 + h2 * -1.0 + 0.3)
        acts = forward(stack, x)
        assert acts[0] == pytest.approx([h1, h2], abs=1e-12)
        assert acts[1] == pytest.approx([out], abs=1e-12)

    def test_repeated_calls_agree_bitwise(self, rng):
        stack = random_stack(rng)
        x = rng.random(4)
        a = forward(stack, x)
        b = forward(stack, x)
        for u, v in zip(a, b):
            assert np.array_equal(u, v)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionMismatch):
            forward(random_stack(rng), np.zeros(5))


class TestFinetune:
    def make_ds(self, rng, n=4, d=4, L=2):
        X = rng.random((n, d))
        Y = rng.integers(0, 2, (n, L)).astype(np.int8)
        return make_dataset(X, Y)

    def pretrained(self, rng, ds, widths=(3, 3)):
        return greedy_pretrain(ds.features, list(widths),
                               RbmHyper(n_hidden=3, epochs=10), seed=2)

    def test_zero_epochs_only_initializes_output(self, rng):
        ds = self.make_ds(rng)
        stack = self.pretrained(rng, ds)
        tuned = attach_and_finetune(stack, ds, BpHyper(bp_epochs=0), seed=1)
        assert tuned.has_output
        for before, after in zip(stack.layers, tuned.layers):
            assert np.array_equal(before.W, after.W)
            assert np.array_equal(before.b_hid, after.b_hid)

    def test_zero_learning_rate_changes_nothing(self, rng):
        ds = self.make_ds(rng)
        stack = self.pretrained(rng, ds)
        frozen = attach_and_finetune(stack, ds, BpHyper(bp_epochs=5,
                                                        bp_learning_rate=0.0), seed=1)
        init_only = attach_and_finetune(stack, ds, BpHyper(bp_epochs=0), seed=1)
        for a, b in zip(frozen.layers, init_only.layers):
            assert np.array_equal(a.W, b.W)
        assert np.array_equal(frozen.output_weights, init_only.output_weights)

    def test_single_instance_overfits_to_its_label(self, rng):
        X = rng.random((1, 4))
        Y = np.array([[1, 0]], dtype=np.int8)
        ds = make_dataset(X, Y)
        stack = greedy_pretrain(X, [3], RbmHyper(n_hidden=3, epochs=20), seed=0)
        with pytest.warns(UserWarning):  # 200 epochs is deliberate overfitting here
            tuned = attach_and_finetune(stack, ds, BpHyper(bp_epochs=200,
                                                           bp_learning_rate=1.0), seed=0)
        acts = forward(tuned, X)
        assert np.abs(acts[-1] - Y).max() < 0.1
        assert np.array_equal(predict_labels(tuned, X[0]), Y[0])

    def test_gradients_match_finite_differences(self, rng):
        stack = random_stack(rng, dims=(4, 3, 2), n_labels=2)
        X = rng.random((3, 4))
        Y = rng.integers(0, 2, (3, 2)).astype(float)
        _, grads = loss_and_grads(stack, X, Y)
        analytic = np.concatenate([np.concatenate([gW.ravel(), gb]) for gW, gb in grads])
        fd = helpers.finite_difference(
            lambda p: loss_and_grads(unflatten_stack(stack, p), X, Y)[0],
            flatten_stack(stack))
        assert helpers.relative_error(analytic, fd) < 1e-4

    def test_loss_non_increasing_at_small_rate(self, rng):
        ds = self.make_ds(rng, n=4)
        stack = self.pretrained(rng, ds)
        losses = []
        for epochs in range(0, 9):
            tuned = attach_and_finetune(stack, ds, BpHyper(bp_epochs=epochs,
                                                           bp_learning_rate=0.01),
                                        seed=5)
            losses.append(loss_and_grads(tuned, ds.features, ds.labels)[0])
        assert all(a >= b - 1e-9 for a, b in zip(losses, losses[1:]))

    def test_deterministic_given_seed(self, rng):
        ds = self.make_ds(rng, n=6)
        stack = self.pretrained(rng, ds)
        a = attach_and_finetune(stack, ds, BpHyper(bp_epochs=7), seed=3)
        b = attach_and_finetune(stack, ds, BpHyper(bp_epochs=7), seed=3)
        assert np.array_equal(a.output_weights, b.output_weights)
        for la, lb in zip(a.layers, b.layers):
            assert np.array_equal(la.W, lb.W)

    def test_warns_past_hundred_epochs_without_early_stop(self, rng):
        ds = self.make_ds(rng)
        stack = self.pretrained(rng, ds)
        with pytest.warns(UserWarning, match="overfit"):
            attach_and_finetune(stack, ds, BpHyper(bp_epochs=101), seed=0)

    def test_early_stop_runs(self, rng):
        ds = self.make_ds(rng, n=12)
        stack = self.pretrained(rng, ds)
        tuned = attach_and_finetune(stack, ds,
                                    BpHyper(bp_epochs=150, early_stop=True,
                                            patience=2), seed=0)
        assert np.isfinite(tuned.output_weights).all()

    def test_feature_width_mismatch(self, rng):
        ds = self.make_ds(rng, d=5)
        stack = random_stack(rng)
        with pytest.raises(DimensionMismatch):
            attach_and_finetune(stack, ds, BpHyper(), seed=0)


class TestBaseline:
    def test_random_init_differs_from_pretrained(self, rng):
        X = rng.random((8, 4))
        Y = rng.integers(0, 2, (8, 2)).astype(np.int8)
        ds = make_dataset(X, Y)
        pre = greedy_pretrain(X, [3, 3], RbmHyper(n_hidden=3, epochs=30), seed=4)
        pre = attach_and_finetune(pre, ds, BpHyper(bp_epochs=0), seed=4)
        base = bpmll_baseline(ds, [3, 3], BpHyper(bp_epochs=0), seed=4)
        assert not np.allclose(pre.layers[0].W, base.layers[0].W)

    def test_baseline_architecture_matches(self, rng):
        X = rng.random((8, 5))
        Y = rng.integers(0, 2, (8, 3)).astype(np.int8)
        ds = make_dataset(X, Y)
        base = bpmll_baseline(ds, [4, 2], BpHyper(bp_epochs=1), seed=0)
        assert [l.W.shape for l in base.layers] == [(5, 4), (4, 2)]
        assert base.output_weights.shape == (2, 3)


class TestPredictLabels:
    def constant_output_stack(self, activations):
        # zero hidden weights make the hidden unit sit at 0.5; bias the
        # output layer to hit the requested activations exactly
        logits = [math.log(a / (1 - a)) for a in activations]
        return DbnStack((Rbm(np.zeros((2, 1)), np.zeros(2), np.zeros(1)),),
                        np.zeros((1, len(activations))), np.array(logits))

    def test_threshold_at_half(self):
        stack = self.constant_output_stack([0.9, 0.1])
        assert predict_labels(stack, np.array([0.3, 0.3]), 0.5).tolist() == [1, 0]

    def test_zero_threshold_gives_all_ones(self):
        stack = self.constant_output_stack([0.9, 0.1])
        assert predict_labels(stack, np.array([0.3, 0.3]), 0.0).tolist() == [1, 1]

    def test_sweep_monotone_in_threshold(self, rng):
        stack = random_stack(rng, dims=(3, 4), n_labels=5)
        x = rng.random(3)
        counts = [predict_labels(stack, x, t).sum() for t in np.linspace(0.05, 0.95, 10)]
        assert all(a >= b for a, b in zip(counts, counts[1:]))

    def test_missing_output_layer_is_state_error(self, rng):
        stack = DbnStack((Rbm(rng.standard_normal((3, 2)), np.zeros(3), np.zeros(2)),))
        with pytest.raises(ModelStateError):
            predict_labels(stack, np.zeros(3))


class TestStackPersistence:
    def test_round_trip_is_bit_exact(self, rng):
        stack = random_stack(rng, dims=(5, 3, 2), n_labels=4)
        back = stack_from_bytes(stack_to_bytes(stack))
        for a, b in zip(stack.layers, back.layers):
            assert np.array_equal(a.W, b.W)
            assert np.array_equal(a.b_vis, b.b_vis)
            assert np.array_equal(a.b_hid, b.b_hid)
        assert np.array_equal(stack.output_weights, back.output_weights)
        assert np.array_equal(stack.output_bias, back.output_bias)

    def test_file_round_trip_without_output(self, rng, tmp_path):
        stack = DbnStack((Rbm(rng.standard_normal((3, 2)), np.zeros(3), np.zeros(2)),))
        save_stack(stack, tmp_path / "s.dbn")
        back = load_stack(tmp_path / "s.dbn")
        assert not back.has_output
        assert np.array_equal(back.layers[0].W, stack.layers[0].W)

    def test_bad_magic_rejected(self):
        with pytest.raises(ValidationError):
            stack_from_bytes(b"BOGUS!" + b"\0" * 32)

    def test_mismatched_layers_rejected(self, rng):
        with pytest.raises(DimensionMismatch):
            DbnStack((Rbm(rng.standard_normal((3, 2)), np.zeros(3), np.zeros(2)),
                      Rbm(rng.standard_normal((3, 2)), np.zeros(3), np.zeros(2))))
