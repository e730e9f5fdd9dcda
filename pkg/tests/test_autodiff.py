"""Derivative engine checks against finite differences and closed forms."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elastodyn import autodiff as ad

from util import fd_grad, fd_second, max_rel_err, n_tiny, tiny_mlp_loss, \
    tiny_mlp_loss_tracked


class TestGrad:
    def test_square_at_three(self):
        th = ad.Value(3.0)
        assert ad.grad(th.square(), [th]) == pytest.approx([6.0])

    def test_tanh_at_zero(self):
        th = ad.Value(0.0)
        assert ad.grad(ad.tanh(th), [th]) == pytest.approx([1.0])

    @pytest.mark.parametrize("seed", range(20))
    def test_mlp_grad_matches_finite_differences(self, seed):
        rng = np.random.default_rng(seed)
        theta = rng.normal(scale=0.6, size=n_tiny())
        x = rng.normal(size=(6, 2))
        loss, leaves = tiny_mlp_loss_tracked(theta, x)
        got = ad.grad(loss, leaves)
        want = fd_grad(lambda t: tiny_mlp_loss(t, x), theta, h=1e-5)
        assert max_rel_err(got, want) < 1e-6

    def test_unused_leaf_gets_zero(self):
        a, b = ad.Value(2.0), ad.Value(5.0)
        g = ad.grad(a.square(), [a, b])
        assert g == pytest.approx([4.0, 0.0])

    def test_linearity(self):
        rng = np.random.default_rng(0)
        theta = rng.normal(size=4)

        def build(t):
            xs = [ad.Value(v) for v in t]
            l1 = ad.square(xs[0]) * ad.tanh(xs[1]) + ad.sin(xs[2])
            l2 = ad.exp(xs[3] * 0.3) + xs[0] * xs[3]
            return l1, l2, xs

        l1, l2, xs = build(theta)
        g = ad.grad(2.5 * l1 + (-1.25) * l2, xs)
        l1, l2, xs = build(theta)
        g1 = ad.grad(l1, xs)
        l1, l2, xs = build(theta)
        g2 = ad.grad(l2, xs)
        assert max_rel_err(g, 2.5 * g1 - 1.25 * g2, floor=1e-12) < 1e-12

    def test_determinism_bit_identical(self):
        rng = np.random.default_rng(3)
        theta = rng.normal(size=n_tiny())
        x = rng.normal(size=(5, 2))
        runs = []
        for _ in range(2):
            loss, leaves = tiny_mlp_loss_tracked(theta, x)
            runs.append(ad.grad(loss, leaves))
        assert np.array_equal(runs[0], runs[1])

    def test_non_finite_raises_named(self):
        x = ad.Value(0.0)
        with pytest.raises(ad.NonFiniteError, match="div"):
            1.0 / x

    def test_exp_overflow_raises(self):
        x = ad.Value(1000.0)
        with pytest.raises(ad.NonFiniteError, match="exp"):
            ad.exp(x)

    def test_unsupported_operand_is_error(self):
        with pytest.raises(TypeError):
            ad.Value(1.0) + "nope"

    def test_pow_requires_constant_exponent(self):
        with pytest.raises(TypeError):
            ad.Value(2.0) ** ad.Value(3.0)


class TestJet:
    def test_square_jet(self):
        j = ad.jet_eval(lambda xs: ad.square(xs[0]), [5.0], 0)
        assert (j.value, j.d1, j.d2) == pytest.approx((25.0, 10.0, 2.0))

    def test_sin_jet_at_zero(self):
        j = ad.jet_eval(lambda xs: ad.sin(xs[1]), [3.0, 0.0], 1)
        assert (j.value, j.d1, j.d2) == pytest.approx((0.0, 1.0, 0.0))

    def test_seed_identity(self):
        j = ad.jet_eval(lambda xs: xs[0], [4.2], 0)
        assert (j.value, j.d1, j.d2) == (4.2, 1.0, 0.0)

    def test_index_out_of_range(self):
        with pytest.raises(IndexError):
            ad.jet_eval(lambda xs: xs[0], [1.0], 3)

    @pytest.mark.parametrize("seed", range(20))
    def test_mlp_jet_matches_second_differences(self, seed):
        rng = np.random.default_rng(100 + seed)
        theta = rng.normal(scale=0.6, size=n_tiny())
        point = rng.normal(size=2)

        def f_plain(x0):
            x = np.array([[x0, point[1]]])
            return tiny_mlp_loss(theta, x)

        def f_jets(xs):
            x = np.array(point)

            def net(t):
                w1 = theta[:16].reshape(2, 8)
                b1 = theta[16:24]
                w2 = theta[24:32].reshape(8, 1)
                b2 = theta[32]
                row = [xs[0] * w1[0, j] + x[1] * w1[1, j] + b1[j] for j in range(8)]
                h = [ad.tanh(r) for r in row]
                out = b2
                for j in range(8):
                    out = out + h[j] * w2[j, 0]
                return ad.square(out)

            return net(xs)

        j = ad.jet_eval(f_jets, point, 0)
        assert abs(j.value - f_plain(point[0])) < 1e-12
        d1 = (f_plain(point[0] + 1e-5) - f_plain(point[0] - 1e-5)) / 2e-5
        d2 = fd_second(f_plain, point[0], h=1e-3)
        assert max_rel_err([j.d1], [d1], floor=1e-6) < 1e-4
        assert max_rel_err([j.d2], [d2], floor=1e-6) < 1e-4

    @given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
    @settings(max_examples=50, deadline=None)
    def test_chain_rule_exactness(self, x, a):
        # f(g(x)) with f=sin, g = a*x^2: closed-form first/second derivative
        def f(xs):
            return ad.sin(a * ad.square(xs[0]))

        j = ad.jet_eval(f, [x], 0)
        g, dg, ddg = a * x * x, 2 * a * x, 2 * a
        want1 = np.cos(g) * dg
        want2 = -np.sin(g) * dg * dg + np.cos(g) * ddg
        assert abs(j.d1 - want1) <= 1e-12 * max(1.0, abs(want1))
        assert abs(j.d2 - want2) <= 1e-12 * max(1.0, abs(want2))

    @given(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0), st.floats(0.1, 2.0))
    @settings(max_examples=50, deadline=None)
    def test_jet_arithmetic_reduces_to_plain(self, x, y, d):
        # zero seeds reproduce plain arithmetic exactly
        jx, jy = ad.Jet2(x, 0.0, 0.0), ad.Jet2(y, 0.0, 0.0)
        expr = (jx * jy + ad.tanh(jx) - jy / d) * 0.5
        plain = (x * y + np.tanh(x) - y / d) * 0.5
        assert ad.payload(expr.value) == pytest.approx(plain, abs=1e-15)
        assert expr.d1 == 0.0 and expr.d2 == 0.0

    def test_division_rule(self):
        j = ad.jet_eval(lambda xs: ad.sin(xs[0]) / xs[0], [1.3], 0)
        x = 1.3
        want1 = (np.cos(x) * x - np.sin(x)) / x**2
        want2 = (-np.sin(x) * x**2 - 2 * x * np.cos(x) + 2 * np.sin(x)) / x**3
        assert j.d1 == pytest.approx(want1, rel=1e-12)
        assert j.d2 == pytest.approx(want2, rel=1e-12)


class TestGradThroughJets:
    def test_constant_field_zero_gradient(self):
        # u(t) = c + w*t^2 evaluated at w=0 is the constant field c;
        # the squared-curvature residual must not pull on c
        c, w = ad.Value(0.7), ad.Value(0.0)
        t = ad.Jet2(np.asarray(0.3), 1.0, 0.0)
        u = c + w * ad.square(t)
        loss = ad.square(u.d2)
        g = ad.grad(loss, [c, w])
        assert g[0] == 0.0

    def test_quadratic_residual_at_minimum(self):
        w = ad.Value(1.0)
        t = ad.Jet2(np.asarray(0.7), 1.0, 0.0)
        u = w * ad.square(t)
        loss = ad.square(u.d2 - 2.0)
        assert ad.grad(loss, [w]) == pytest.approx([0.0])

    @pytest.mark.parametrize("seed", range(20))
    def test_residual_loss_gradient_matches_fd(self, seed):
        rng = np.random.default_rng(200 + seed)
        n = n_tiny()
        theta = rng.normal(scale=0.5, size=n)
        pts = rng.uniform(-1, 1, size=(10, 2))

        def loss_tracked(t):
            w1 = ad.Value(t[:16].reshape(2, 8))
            b1 = ad.Value(t[16:24])
            w2 = ad.Value(t[24:32].reshape(8, 1))
            b2 = ad.Value(np.asarray(t[32]))
            seed_x = np.zeros_like(pts)
            seed_x[:, 0] = 1.0
            xj = ad.Jet2(pts, seed_x, 0.0)
            h = ad.tanh(ad.matmul(xj, w1) + b1)
            out = ad.matmul(h, w2) + b2
            # residual mixes value, first and second derivative
            r = out.d2 + 0.5 * out.d1 - 2.0 * out.value
            return ad.amean(ad.square(r)), [w1, b1, w2, b2]

        def loss_plain(t):
            lv, _ = loss_tracked(t)
            return float(ad.payload(lv))

        lv, leaves = loss_tracked(theta)
        got = ad.grad(lv, leaves)
        want = fd_grad(loss_plain, theta, h=1e-5)
        assert max_rel_err(got, want, floor=1e-6) < 1e-4


class TestMultiJet:
    def test_matches_separate_jet_passes(self):
        from elastodyn import network

        rng = np.random.default_rng(0)
        net = network.init((3, 8, 3, 5), seed=4)
        pts = rng.uniform(0, 1, size=(7, 3))
        seeds = np.zeros((2,) + pts.shape)
        seeds[0, :, 0] = 1.0
        seeds[1, :, 1] = 1.0
        tseed = np.zeros_like(pts)
        tseed[:, 2] = 1.0
        mj = network.forward(net, ad.MultiJet(pts, seeds, tseed, 0.0))
        for k in range(3):
            seed = np.zeros_like(pts)
            seed[:, k] = 1.0
            ref = network.forward(net, ad.Jet2(pts, seed, 0.0))
            if k < 2:
                assert np.array_equal(np.asarray(mj.d1)[k], np.asarray(ref.d1))
            else:
                assert np.array_equal(np.asarray(mj.e1), np.asarray(ref.d1))
                assert np.array_equal(np.asarray(mj.e2), np.asarray(ref.d2))

    def test_value_payload_matches_plain_forward(self):
        from elastodyn import network

        net = network.init((3, 8, 2, 5), seed=9)
        pts = np.random.default_rng(1).uniform(size=(4, 3))
        mj = network.forward(net, ad.MultiJet(pts, np.zeros((1,) + pts.shape),
                                              0.0, 0.0))
        assert np.array_equal(ad.payload(mj.value), network.forward(net, pts))


class TestValueArithmetic:
    @given(st.floats(-5, 5), st.floats(-5, 5))
    @settings(max_examples=50, deadline=None)
    def test_plain_arithmetic_reproduced(self, a, b):
        va, vb = ad.Value(a), ad.Value(b)
        expr = va * vb + va - vb * 0.5
        assert float(expr.data) == pytest.approx(a * b + a - b * 0.5, abs=1e-14)

    def test_matmul_vector_cases(self):
        rng = np.random.default_rng(5)
        w = rng.normal(size=(3, 4))
        x = rng.normal(size=3)
        v = ad.Value(w)
        out = ad.matmul(x, v)
        assert ad.payload(out) == pytest.approx(x @ w)
        g = ad.grad(ad.asum(out), [v])
        assert g == pytest.approx(np.outer(x, np.ones(4)).ravel())

    def test_backward_requires_scalar(self):
        v = ad.Value(np.ones(3))
        with pytest.raises(ValueError):
            v.backward()
