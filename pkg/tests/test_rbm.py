import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import helpers
from deepmlc.errors import (DimensionMismatch, ModelTooLargeError, TrainingError,
                            ValidationError)
from deepmlc.rbm import (Rbm, RbmHyper, cd_statistics, cd_train, energy,
                         exact_log_likelihood, hidden_probs, load_rbm,
                         load_rbm_json, rbm_from_bytes, rbm_to_bytes, save_rbm,
                         save_rbm_json, transform, visible_probs)


def zero_rbm(d, u):
    return Rbm(np.zeros((d, u)), np.zeros(d), np.zeros(u))


def random_rbm(rng, d, u, scale=1.0):
    return Rbm(rng.standard_normal((d, u)) * scale,
               rng.standard_normal(d) * scale,
               rng.standard_normal(u) * scale)


class TestEnergy:
    def test_zero_model_zero_energy(self):
        r = zero_rbm(3, 2)
        assert energy(r, np.array([1.0, 0.0, 1.0]), np.array([1.0, 1.0])) == 0.0

    def test_single_edge(self):
        r = Rbm(np.array([[2.0]]), np.zeros(1), np.zeros(1))
        assert energy(r, np.array([1.0]), np.array([1.0])) == -2.0

    def test_partition_function_matches_oracle(self, rng):
        r = random_rbm(rng, 3, 2)
        z_module = sum(math.exp(-energy(r, x, z))
                       for x in helpers.binary_states(3)
                       for z in helpers.binary_states(2))
        z_oracle = helpers.oracle_partition(r.W, r.b_vis, r.b_hid)
        assert z_module == pytest.approx(z_oracle, rel=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            energy(zero_rbm(3, 2), np.zeros(2), np.zeros(2))


class TestConditionals:
    def test_zero_parameters_give_half(self):
        r = zero_rbm(4, 3)
        assert np.allclose(hidden_probs(r, np.ones(4)), 0.5)
        assert np.allclose(visible_probs(r, np.ones(3)), 0.5)

    def test_saturation_is_monotone(self):
        x = np.ones(2)
        probs = [hidden_probs(Rbm(np.full((2, 1), w), np.zeros(2), np.zeros(1)), x)[0]
                 for w in (0.5, 2.0, 8.0, 32.0)]
        assert all(a < b for a, b in zip(probs, probs[1:]))
        assert probs[-1] > 0.999999

    def test_matches_enumeration_oracle_both_directions(self, rng):
        for _ in range(20):
            d = int(rng.integers(2, 6))
            u = int(rng.integers(2, 5))
            r = random_rbm(rng, d, u)
            x = rng.integers(0, 2, d).astype(float)
            z = rng.integers(0, 2, u).astype(float)
            assert np.allclose(hidden_probs(r, x),
                               helpers.oracle_hidden_conditional(r.W, r.b_vis, r.b_hid, x),
                               atol=1e-10)
            assert np.allclose(visible_probs(r, z),
                               helpers.oracle_visible_conditional(r.W, r.b_vis, r.b_hid, z),
                               atol=1e-10)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.lists(st.floats(-8, 8), min_size=2, max_size=2),
                    min_size=2, max_size=3),
           st.lists(st.floats(0, 1), min_size=2, max_size=3))
    def test_probabilities_strictly_inside_unit_interval(self, w_rows, x):
        d = len(w_rows)
        if len(x) != d:
            x = (x * d)[:d]
        r = Rbm(np.array(w_rows), np.zeros(d), np.zeros(2))
        p = hidden_probs(r, np.array(x))
        assert np.all(p > 0) and np.all(p < 1)


class TestCdTrain:
    def test_zero_learning_rate_keeps_initial_weights(self):
        X = helpers.two_cluster_features()
        hyper = RbmHyper(n_hidden=2, learning_rate=0.0, epochs=5)
        model, _ = cd_train(X, hyper, seed=77)
        # the documented init recipe: seeded N(0, 0.01) weights, zero biases
        expected = np.random.default_rng(77).normal(0.0, 0.01, size=(6, 2))
        assert np.array_equal(model.W, expected)
        assert np.array_equal(model.b_vis, np.zeros(6))
        assert np.array_equal(model.b_hid, np.zeros(2))

    def test_bitwise_deterministic(self):
        X = helpers.two_cluster_features()
        hyper = RbmHyper(n_hidden=3, epochs=40, learning_rate=0.1, momentum=0.5)
        a, trace_a = cd_train(X, hyper, seed=5)
        b, trace_b = cd_train(X, hyper, seed=5)
        assert np.array_equal(a.W, b.W)
        assert np.array_equal(a.b_vis, b.b_vis)
        assert np.array_equal(a.b_hid, b.b_hid)
        assert trace_a.reconstruction_errors == trace_b.reconstruction_errors

    def test_reconstruction_error_trend_on_two_clusters(self):
        X = helpers.two_cluster_features()
        hyper = RbmHyper(n_hidden=2, learning_rate=0.1, momentum=0.2, epochs=500)
        _, trace = cd_train(X, hyper, seed=3)
        errs = trace.reconstruction_errors
        assert len(errs) == 500
        assert np.mean(errs[-10:]) < np.mean(errs[:10])

    def test_cd_update_direction_matches_exact_gradient(self, rng):
        # average CD-1 W-gradient over 100 seeds vs the enumeration oracle
        d, u = 3, 2
        r = random_rbm(rng, d, u, scale=0.5)
        X = (rng.random((16, d)) < 0.5).astype(float)
        exact = helpers.oracle_ll_grad_W(r.W, r.b_vis, r.b_hid, X)
        avg = np.zeros((d, u))
        for s in range(100):
            grad_W, _, _, _ = cd_statistics(r, X, np.random.default_rng(s), k=1)
            avg += grad_W
        avg /= 100
        assert float((avg * exact).sum()) > 0.0

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError):
            cd_train(np.zeros((0, 3)), RbmHyper(n_hidden=2, epochs=1), seed=0)

    def test_out_of_range_inputs_rejected(self):
        with pytest.raises(ValidationError):
            cd_train(np.array([[1.5, 0.0]]), RbmHyper(n_hidden=1, epochs=1), seed=0)

    def test_divergence_raises_with_epoch(self):
        X = helpers.two_cluster_features()
        hyper = RbmHyper(n_hidden=2, learning_rate=1e300, weight_cost=1e8, epochs=5)
        with pytest.raises(TrainingError) as err:
            cd_train(X, hyper, seed=0)
        assert err.value.epoch is not None

    def test_weight_cost_keeps_norm_bounded_on_noise(self, rng):
        X = rng.random((30, 8))
        hyper = RbmHyper(n_hidden=4, learning_rate=0.1, momentum=0.8,
                         weight_cost=2e-5, epochs=1000)
        model, _ = cd_train(X, hyper, seed=1)
        assert np.isfinite(model.W).all()
        assert np.abs(model.W).max() < 100.0


class TestTransform:
    def test_pure_and_deterministic(self, rng):
        r = random_rbm(rng, 5, 3)
        x = rng.random(5)
        assert np.array_equal(transform(r, x), transform(r, x))

    def test_zero_model_constant_half(self):
        assert np.allclose(transform(zero_rbm(4, 3), np.array([0.2, 0.9, 0.1, 0.5])), 0.5)

    def test_output_length_matches_hidden_units(self, rng):
        r = random_rbm(rng, 10, 120, scale=0.1)
        assert transform(r, rng.random(10)).shape == (120,)

    def test_hidden_permutation_permutes_output(self, rng):
        r = random_rbm(rng, 4, 3)
        perm = np.array([2, 0, 1])
        permuted = Rbm(r.W[:, perm], r.b_vis, r.b_hid[perm])
        x = rng.random(4)
        assert np.allclose(transform(permuted, x), transform(r, x)[perm])


class TestExactLogLikelihood:
    def test_zero_model_is_uniform_over_visible_states(self):
        r = zero_rbm(2, 2)
        X = np.array([[0.0, 1.0], [1.0, 1.0]])
        assert exact_log_likelihood(r, X) == pytest.approx(math.log(1 / 4), abs=1e-12)

    def test_matches_enumeration_oracle(self, rng):
        r = random_rbm(rng, 4, 2, scale=0.7)
        X = (rng.random((5, 4)) < 0.5).astype(float)
        assert exact_log_likelihood(r, X) == pytest.approx(
            helpers.oracle_mean_log_likelihood(r.W, r.b_vis, r.b_hid, X), abs=1e-10)

    def test_likelihood_improves_after_cd_training(self):
        X = helpers.two_cluster_features()
        hyper = RbmHyper(n_hidden=2, learning_rate=0.1, momentum=0.2, epochs=200)
        initial, _ = cd_train(X, replace(hyper, epochs=0), seed=21)
        trained, _ = cd_train(X, hyper, seed=21)
        assert exact_log_likelihood(trained, X) > exact_log_likelihood(initial, X)

    def test_invariant_to_hidden_relabeling(self, rng):
        r = random_rbm(rng, 3, 3)
        perm = np.array([1, 2, 0])
        permuted = Rbm(r.W[:, perm], r.b_vis, r.b_hid[perm])
        X = (rng.random((4, 3)) < 0.5).astype(float)
        assert exact_log_likelihood(r, X) == pytest.approx(
            exact_log_likelihood(permuted, X), abs=1e-12)

    def test_capacity_guard(self, rng):
        r = random_rbm(rng, 15, 10, scale=0.1)
        with pytest.raises(ModelTooLargeError):
            exact_log_likelihood(r, np.zeros((1, 15)))


class TestPersistence:
    def test_binary_round_trip_is_bit_exact(self, rng):
        r = random_rbm(rng, 7, 4)
        back = rbm_from_bytes(rbm_to_bytes(r))
        assert np.array_equal(back.W, r.W)
        assert np.array_equal(back.b_vis, r.b_vis)
        assert np.array_equal(back.b_hid, r.b_hid)
        assert back.rng_seed == r.rng_seed

    def test_file_round_trips(self, rng, tmp_path):
        r = random_rbm(rng, 3, 2)
        save_rbm(r, tmp_path / "m.rbm")
        back = load_rbm(tmp_path / "m.rbm")
        assert np.array_equal(back.W, r.W)
        save_rbm_json(r, tmp_path / "m.json")
        back = load_rbm_json(tmp_path / "m.json")
        assert np.array_equal(back.W, r.W)

    def test_bad_magic_rejected(self):
        with pytest.raises(ValidationError):
            rbm_from_bytes(b"NOTRBM" + b"\0" * 64)
