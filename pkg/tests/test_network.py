"""Gated-MLP construction and forward-pass checks."""

import numpy as np
import pytest

from elastodyn import autodiff as ad
from elastodyn import network


def straight_line_forward(p, x):
    """Independent plain-numpy transcription of the architecture."""
    u = np.tanh(x @ p.enc1_w + p.enc1_b)
    v = np.tanh(x @ p.enc2_w + p.enc2_b)
    h = np.tanh(x @ p.hidden[0][0] + p.hidden[0][1])
    for w, b in p.hidden[1:]:
        z = np.tanh(h @ w + b)
        h = (1.0 - z) * u + z * v
    return h @ p.out_w + p.out_b


class TestInit:
    def test_deterministic(self):
        a = network.init((3, 4, 2, 5), seed=7)
        b = network.init((3, 4, 2, 5), seed=7)
        assert np.array_equal(a.to_vector(), b.to_vector())

    def test_different_seed_differs(self):
        a = network.init((3, 4, 2, 5), seed=7)
        b = network.init((3, 4, 2, 5), seed=8)
        assert not np.array_equal(a.to_vector(), b.to_vector())

    def test_biases_zero(self):
        p = network.init((4, 16, 3, 9), seed=0)
        assert not p.enc1_b.any()
        assert not p.enc2_b.any()
        assert not p.out_b.any()
        assert not any(b.any() for _, b in p.hidden)

    def test_glorot_bounds_per_layer(self):
        p = network.init((3, 64, 4, 5), seed=1)
        checks = [(p.enc1_w, 3, 64), (p.enc2_w, 3, 64),
                  (p.hidden[0][0], 3, 64), (p.out_w, 64, 5)]
        checks += [(w, 64, 64) for w, _ in p.hidden[1:]]
        for w, fan_in, fan_out in checks:
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            assert np.all(np.abs(w) <= bound)
            # and the weights actually use the range
            assert np.max(np.abs(w)) > 0.5 * bound

    def test_invalid_dims(self):
        with pytest.raises(ValueError):
            network.init((0, 4, 2, 5), seed=1)
        with pytest.raises(ValueError):
            network.init((3, 4, -1, 5), seed=1)

    def test_vector_round_trip(self):
        p = network.init((3, 8, 3, 5), seed=5)
        vec = p.to_vector()
        q = network.from_vector(p.dims, vec)
        assert np.array_equal(q.to_vector(), vec)
        assert p.n_params == vec.size == network.n_params(p.dims)


class TestForward:
    def test_zero_params_zero_output(self):
        p = network.init((3, 8, 2, 5), seed=0)
        z = network.from_vector(p.dims, np.zeros(p.n_params))
        out = network.forward(z, np.array([0.3, -0.2, 0.9]))
        assert np.array_equal(out, np.zeros(5))

    def test_equal_encoders_collapse_gates(self):
        # u == v makes the gate mix exact: h_{l+1} = u for every layer
        p = network.init((3, 8, 4, 5), seed=3)
        p.enc2_w = p.enc1_w.copy()
        p.enc2_b = p.enc1_b.copy()
        x = np.random.default_rng(0).normal(size=(6, 3))
        got = network.forward(p, x)
        u = np.tanh(x @ p.enc1_w + p.enc1_b)
        assert np.allclose(got, u @ p.out_w + p.out_b, rtol=0, atol=0)

    def test_matches_straight_line_oracle(self):
        p = network.init((3, 16, 4, 5), seed=11)
        x = np.array([0.1, 0.2, 0.3])
        got = network.forward(p, x)
        want = straight_line_forward(p, x)
        assert np.allclose(got, want, rtol=1e-12, atol=1e-14)

    def test_matches_oracle_batched(self):
        p = network.init((4, 8, 3, 9), seed=2)
        x = np.random.default_rng(4).uniform(-1, 1, size=(17, 4))
        assert np.allclose(network.forward(p, x), straight_line_forward(p, x),
                           rtol=1e-12, atol=1e-14)

    def test_gate_mix_identity(self):
        # h_{l+1} - u == z_l * (v - u): the gate algebra, up to one rounding
        # of the final addition (all magnitudes are <= 1 here)
        p = network.init((2, 4, 2, 3), seed=8)
        x = np.random.default_rng(1).normal(size=(5, 2))
        u = np.tanh(x @ p.enc1_w + p.enc1_b)
        v = np.tanh(x @ p.enc2_w + p.enc2_b)
        h = np.tanh(x @ p.hidden[0][0] + p.hidden[0][1])
        w, b = p.hidden[1]
        z = np.tanh(h @ w + b)
        h2 = u + z * (v - u)
        assert np.allclose(h2 - u, z * (v - u), rtol=0.0, atol=1e-15)

    def test_output_affine_in_head(self):
        p = network.init((3, 8, 2, 5), seed=6)
        x = np.random.default_rng(2).normal(size=(4, 3))
        base = network.forward(p, x)
        scaled = network.from_vector(p.dims, p.to_vector())
        scaled.out_w = 3.0 * scaled.out_w
        scaled.out_b = 3.0 * scaled.out_b
        assert np.allclose(network.forward(scaled, x), 3.0 * base, rtol=1e-13)

    def test_dimension_mismatch(self):
        p = network.init((3, 8, 2, 5), seed=0)
        with pytest.raises(ValueError):
            network.forward(p, np.zeros(4))

    def test_jets_finite(self):
        p = network.init((3, 8, 3, 5), seed=10)
        pts = np.random.default_rng(3).uniform(-2, 2, size=(9, 3))
        seed = np.zeros_like(pts)
        seed[:, 2] = 1.0
        out = network.forward(p, ad.Jet2(pts, seed, 0.0))
        for comp in (out.value, out.d1, out.d2):
            assert np.all(np.isfinite(ad.payload(comp)))


class TestCheckpoint:
    def test_round_trip_bit_exact(self, tmp_path):
        p = network.init((4, 8, 3, 9), seed=13)
        path = tmp_path / "net.txt"
        network.save_params(path, p)
        q = network.load_params(path)
        assert q.dims == p.dims
        assert np.array_equal(q.to_vector(), p.to_vector())

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "junk.txt"
        path.write_text("not a checkpoint\n")
        with pytest.raises(ValueError, match="checkpoint"):
            network.load_params(path)

    def test_rejects_truncated(self, tmp_path):
        p = network.init((3, 4, 2, 5), seed=1)
        path = tmp_path / "net.txt"
        network.save_params(path, p)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-3]) + "\n")
        with pytest.raises(ValueError, match="expected"):
            network.load_params(path)
