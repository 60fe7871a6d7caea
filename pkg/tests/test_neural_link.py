import math

import numpy as np
import pytest
from conftest import central_difference, max_rel_err

from plsinet import neural_link as nl
from plsinet.errors import NumericOverflowError, ShapeError
from plsinet.neural_link import MlpSpec
from plsinet.numerics import substream

# single hidden tanh unit with w1=1, b1=0, w2=2, b2=0: g(s) = 2 tanh(s)
HAND_SPEC = MlpSpec(hidden=(1,), activation="tanh")
HAND_PARAMS = np.array([1.0, 0.0, 2.0, 0.0])


class TestSpecAndLayout:
    def test_rejects_empty_hidden(self):
        with pytest.raises(ShapeError):
            MlpSpec(hidden=())

    def test_rejects_bad_width(self):
        with pytest.raises(ShapeError):
            MlpSpec(hidden=(4, 0))

    def test_rejects_unknown_activation(self):
        with pytest.raises(ShapeError):
            MlpSpec(hidden=(4,), activation="gelu")

    def test_layout_offsets_cover_flat_vector(self):
        spec = MlpSpec(hidden=(3, 5), activation="relu")
        table = nl.layout(spec)
        total = nl.n_params(spec)
        # contiguous, in order, ending at the total length
        pos = 0
        for entry in table:
            assert entry["weight_offset"] == pos
            pos += entry["weight_shape"][0] * entry["weight_shape"][1]
            assert entry["bias_offset"] == pos
            pos += entry["bias_shape"][0]
        assert pos == total


class TestHeInit:
    def test_biases_exactly_zero(self):
        spec = MlpSpec(hidden=(7, 3))
        flat = nl.he_init(substream(1), spec)
        for _W, b in nl.unpack(flat, spec):
            assert np.array_equal(b, np.zeros_like(b))

    def test_first_layer_variance_matches_fan_in_one(self):
        spec = MlpSpec(hidden=(64,))
        draws = []
        for seed in range(2000):
            flat = nl.he_init(substream(seed), spec)
            W0, _ = nl.unpack(flat, spec)[0]
            draws.append(W0.ravel())
        var = np.var(np.concatenate(draws))
        assert abs(var - 2.0) / 2.0 < 0.05

    def test_deterministic(self):
        spec = MlpSpec(hidden=(8, 8))
        a = nl.he_init(substream(3), spec)
        b = nl.he_init(substream(3), spec)
        assert np.array_equal(a, b)


class TestForward:
    def test_zero_network_is_zero(self):
        spec = MlpSpec(hidden=(5, 4))
        out, _ = nl.forward(np.zeros(nl.n_params(spec)), spec, np.linspace(-3, 3, 7))
        assert np.array_equal(out, np.zeros(7))

    def test_hand_network_value(self):
        out, _ = nl.forward(HAND_PARAMS, HAND_SPEC, np.array([0.5]))
        assert abs(out[0] - 2.0 * math.tanh(0.5)) < 1e-12
        assert abs(out[0] - 0.9242343145200195) < 1e-12

    def test_batching_is_pure_map(self):
        spec = MlpSpec(hidden=(6, 3), activation="softplus")
        params = nl.he_init(substream(11), spec)
        s = np.array([-1.3, 0.7])
        batched, _ = nl.forward(params, spec, s)
        singles = [nl.forward(params, spec, s[i : i + 1])[0][0] for i in range(2)]
        assert np.array_equal(batched, np.array(singles))

    def test_rejects_matrix_input(self):
        with pytest.raises(ShapeError):
            nl.forward(HAND_PARAMS, HAND_SPEC, np.zeros((2, 2)))

    def test_wrong_param_length(self):
        with pytest.raises(ShapeError):
            nl.forward(np.zeros(3), HAND_SPEC, np.zeros(1))

    def test_overflow_names_layer(self):
        spec = MlpSpec(hidden=(2, 2), activation="relu")
        params = np.zeros(nl.n_params(spec))
        layers = nl.unpack(params, spec)
        layers[0][0][...] = 1.0  # first layer stays finite
        layers[1][0][...] = 1e308  # second layer overflows
        layers[2][0][...] = 1.0
        with pytest.raises(NumericOverflowError, match="hidden layer 1"):
            nl.forward(params, spec, np.array([1.0]))


class TestBackward:
    def test_zero_upstream_gives_zero_gradients(self):
        spec = MlpSpec(hidden=(4, 4))
        params = nl.he_init(substream(2), spec)
        _, tape = nl.forward(params, spec, np.array([0.3, -0.4]))
        g_theta, g_s = nl.backward(tape, np.zeros(2))
        assert np.array_equal(g_theta, np.zeros_like(g_theta))
        assert np.array_equal(g_s, np.zeros(2))

    def test_hand_network_grad_s(self):
        _, tape = nl.forward(HAND_PARAMS, HAND_SPEC, np.array([0.5]))
        _, g_s = nl.backward(tape, np.ones(1))
        expected = 2.0 * (1.0 - math.tanh(0.5) ** 2)
        assert abs(g_s[0] - expected) < 1e-12
        assert abs(g_s[0] - 1.5728954659318548) < 1e-12

    def test_upstream_length_mismatch(self):
        _, tape = nl.forward(HAND_PARAMS, HAND_SPEC, np.array([0.5, 1.0]))
        with pytest.raises(ShapeError):
            nl.backward(tape, np.ones(3))

    def test_gradients_match_finite_differences(self):
        # 50 random (spec, params, batch) triples across all activations
        rng = np.random.default_rng(20240)
        worst = 0.0
        for trial in range(50):
            depth = rng.integers(1, 4)
            hidden = tuple(int(w) for w in rng.integers(1, 7, size=depth))
            act = ("tanh", "softplus", "relu")[trial % 3]
            spec = MlpSpec(hidden=hidden, activation=act)
            params = nl.he_init(substream(trial, 1), spec)
            s = rng.standard_normal(rng.integers(1, 13))
            upstream = rng.standard_normal(s.size)

            _, tape = nl.forward(params, spec, s)
            g_theta, g_s = nl.backward(tape, upstream)

            def objective_theta(p):
                out, _ = nl.forward(p, spec, s)
                return float(upstream @ out)

            def objective_s(sv):
                out, _ = nl.forward(params, spec, sv)
                return float(upstream @ out)

            fd_theta = central_difference(objective_theta, params)
            fd_s = central_difference(objective_s, s)
            worst = max(worst, max_rel_err(g_theta, fd_theta), max_rel_err(g_s, fd_s))
        assert worst < 1e-4

    def test_forward_has_no_side_effects(self):
        spec = MlpSpec(hidden=(5,))
        params = nl.he_init(substream(8), spec)
        before = params.copy()
        nl.forward(params, spec, np.array([0.1, 0.2]))
        assert np.array_equal(params, before)


class TestReluPiecewiseLinearity:
    def test_midpoint_linearity_within_cell(self):
        spec = MlpSpec(hidden=(6, 5), activation="relu")
        params = nl.he_init(substream(77), spec)

        def pattern(s):
            _, tape = nl.forward(params, spec, np.array([s]))
            return tuple((z > 0).ravel().tolist() for z in tape.zs)

        rng = np.random.default_rng(5)
        checked = 0
        while checked < 10:
            a = float(rng.uniform(-2, 2))
            b = a + float(rng.uniform(0.001, 0.05))
            if pattern(a) != pattern(b):
                continue
            ga = nl.evaluate(params, spec, np.array([a]))[0]
            gb = nl.evaluate(params, spec, np.array([b]))[0]
            gm = nl.evaluate(params, spec, np.array([(a + b) / 2]))[0]
            assert abs(gm - 0.5 * (ga + gb)) < 1e-10
            checked += 1
