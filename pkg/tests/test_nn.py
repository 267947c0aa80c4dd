import numpy as np
import pytest

from vibrodiag.errors import NoCachedForward, ShapeMismatch
from vibrodiag.nn import (
    Adam,
    Conv2D,
    Deconv2D,
    Dense,
    Flatten,
    MaxPool2D,
    ReLU,
    Sequential,
    Softmax,
    Upsample2D,
    cross_entropy_loss,
    load_model,
    mse_loss,
    save_model,
)


def numeric_input_grad(layer, x, upstream, h=1e-5):
    """Central finite differences of sum(forward(x) * upstream) wrt x."""
    grad = np.zeros_like(x)
    flat = grad.ravel()
    xf = x.ravel()
    for i in range(x.size):
        orig = xf[i]
        xf[i] = orig + h
        up = np.sum(layer.forward(x) * upstream)
        xf[i] = orig - h
        down = np.sum(layer.forward(x) * upstream)
        xf[i] = orig
        flat[i] = (up - down) / (2 * h)
    return grad


def numeric_param_grad(layer, x, upstream, param, h=1e-5):
    grad = np.zeros_like(param)
    pf = param.ravel()
    gf = grad.ravel()
    for i in range(param.size):
        orig = pf[i]
        pf[i] = orig + h
        up = np.sum(layer.forward(x) * upstream)
        pf[i] = orig - h
        down = np.sum(layer.forward(x) * upstream)
        pf[i] = orig
        gf[i] = (up - down) / (2 * h)
    return grad


def check_gradients(layer, x, rng, rel_tol=1e-4):
    out = layer.forward(x)
    upstream = rng.normal(size=out.shape)
    dx = layer.backward(upstream)
    num_dx = numeric_input_grad(layer, x, upstream)
    denom = np.maximum(np.abs(num_dx), 1e-6)
    assert np.max(np.abs(dx - num_dx) / denom) < rel_tol
    for p, g in zip(layer.params(), layer.grads()):
        layer.forward(x)
        layer.backward(upstream)
        num = numeric_param_grad(layer, x, upstream, p)
        denom = np.maximum(np.abs(num), 1e-6)
        assert np.max(np.abs(g - num) / denom) < rel_tol


def random_layer_cases(n_cases=20):
    cases = []
    for i in range(n_cases):
        rng = np.random.default_rng(100 + i)
        cases.append(("conv2d", Conv2D(2, 3, 3, rng=rng), (2, 5, 5, 2), rng))
        rng = np.random.default_rng(200 + i)
        cases.append(("deconv2d", Deconv2D(2, 3, 3, rng=rng), (2, 5, 5, 2), rng))
        rng = np.random.default_rng(300 + i)
        cases.append(("maxpool2d", MaxPool2D(2, 2), (2, 4, 4, 2), rng))
        rng = np.random.default_rng(400 + i)
        cases.append(("upsample2d", Upsample2D(2, 3), (2, 3, 3, 2), rng))
        rng = np.random.default_rng(500 + i)
        cases.append(("relu", ReLU(), (3, 7), rng))
        rng = np.random.default_rng(600 + i)
        cases.append(("dense", Dense(6, 4, rng=rng), (3, 6), rng))
        rng = np.random.default_rng(700 + i)
        cases.append(("dense_nobias", Dense(6, 4, bias=False, rng=rng), (3, 6), rng))
        rng = np.random.default_rng(800 + i)
        cases.append(("softmax", Softmax(), (3, 5), rng))
        rng = np.random.default_rng(900 + i)
        cases.append(("flatten", Flatten(), (2, 3, 4, 2), rng))
    return cases


class TestForward:
    def test_conv_identity_kernel(self):
        layer = Conv2D(1, 1, 1)
        layer.w[...] = 1.0
        layer.b[...] = 0.0
        x = np.random.default_rng(0).normal(size=(1, 4, 4, 1))
        np.testing.assert_allclose(layer.forward(x), x)

    def test_conv_all_ones_same_padding(self):
        # Oracle: brute-force sliding window on a 3x3 all-ones input.
        layer = Conv2D(1, 1, 3)
        layer.w[...] = 1.0
        layer.b[...] = 0.0
        x = np.ones((1, 3, 3, 1))
        expected = np.array([[4, 6, 4], [6, 9, 6], [4, 6, 4]], dtype=np.float64)
        np.testing.assert_allclose(layer.forward(x)[0, :, :, 0], expected)

    def test_maxpool_single_window(self):
        layer = MaxPool2D(2, 2)
        x = np.array([[1.0, 2.0], [3.0, 4.0]]).reshape(1, 2, 2, 1)
        assert layer.forward(x)[0, 0, 0, 0] == 4.0

    def test_maxpool_rejects_nondivisible(self):
        with pytest.raises(ShapeMismatch):
            MaxPool2D(2, 2).forward(np.zeros((1, 3, 4, 1)))

    def test_upsample_nearest(self):
        layer = Upsample2D(2, 2)
        x = np.arange(4.0).reshape(1, 2, 2, 1)
        out = layer.forward(x)
        assert out.shape == (1, 4, 4, 1)
        np.testing.assert_array_equal(
            out[0, :, :, 0],
            [[0, 0, 1, 1], [0, 0, 1, 1], [2, 2, 3, 3], [2, 2, 3, 3]],
        )

    def test_maxpool_of_upsample_is_identity_on_constants(self):
        x = np.full((1, 3, 3, 2), 2.5)
        up = Upsample2D(2, 2).forward(x)
        np.testing.assert_array_equal(MaxPool2D(2, 2).forward(up), x)

    def test_softmax_rows_sum_to_one(self):
        rng = np.random.default_rng(5)
        p = Softmax().forward(rng.normal(size=(10, 7)) * 10)
        assert np.all(p > 0)
        np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-9)

    def test_conv_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            Conv2D(3, 4).forward(np.zeros((1, 4, 4, 2)))


class TestBackward:
    def test_relu_subgradient(self):
        layer = ReLU()
        x = np.array([[-1.0, 2.0, 0.0]])
        layer.forward(x)
        grad = layer.backward(np.array([[5.0, 7.0, 3.0]]))
        np.testing.assert_array_equal(grad, [[0.0, 7.0, 0.0]])

    def test_dense_input_grad_is_adjoint(self):
        rng = np.random.default_rng(2)
        layer = Dense(4, 3, bias=False, rng=rng)
        x = rng.normal(size=(2, 4))
        layer.forward(x)
        upstream = rng.normal(size=(2, 3))
        np.testing.assert_allclose(layer.backward(upstream), upstream @ layer.w.T)

    def test_backward_before_forward_raises(self):
        with pytest.raises(NoCachedForward):
            ReLU().backward(np.zeros((1, 2)))

    def test_maxpool_ties_route_to_first_index(self):
        layer = MaxPool2D(2, 2)
        x = np.ones((1, 2, 2, 1))
        layer.forward(x)
        grad = layer.backward(np.array([[[[1.0]]]]))
        np.testing.assert_array_equal(grad[0, :, :, 0], [[1.0, 0.0], [0.0, 0.0]])

    @pytest.mark.parametrize(
        "kind,layer,shape,rng",
        random_layer_cases(n_cases=3),
        ids=lambda v: v if isinstance(v, str) else "",
    )
    def test_gradients_match_finite_differences(self, kind, layer, shape, rng):
        x = rng.normal(size=shape)
        check_gradients(layer, x, rng)


class TestLosses:
    def test_mse_perfect_fit(self):
        x = np.random.default_rng(1).normal(size=(2, 3))
        loss, grad = mse_loss(x, x.copy())
        assert loss == 0.0
        np.testing.assert_array_equal(grad, 0.0)

    def test_mse_unit_residual(self):
        loss, _ = mse_loss(np.zeros(4), np.ones(4))
        assert loss == 1.0

    def test_mse_grad_matches_finite_differences(self):
        rng = np.random.default_rng(4)
        pred, target = rng.normal(size=(3, 4)), rng.normal(size=(3, 4))
        _, grad = mse_loss(pred, target)
        h = 1e-6
        i = (1, 2)
        pp, pm = pred.copy(), pred.copy()
        pp[i] += h
        pm[i] -= h
        num = (mse_loss(pp, target)[0] - mse_loss(pm, target)[0]) / (2 * h)
        assert abs(grad[i] - num) < 1e-8

    def test_cross_entropy_uniform(self):
        probs = np.full((1, 5), 0.2)
        onehot = np.eye(5)[[2]]
        loss, _ = cross_entropy_loss(probs, onehot)
        assert abs(loss - np.log(5)) < 1e-9

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            mse_loss(np.zeros(3), np.zeros(4))


class TestAdam:
    def test_zero_gradient_no_change(self):
        p = np.array([1.0, 2.0])
        opt = Adam([p])
        opt.step([np.zeros(2)])
        np.testing.assert_array_equal(p, [1.0, 2.0])
        np.testing.assert_array_equal(opt.m[0], 0.0)
        np.testing.assert_array_equal(opt.v[0], 0.0)

    def test_first_step_magnitude_equals_lr(self):
        p = np.array([0.0])
        opt = Adam([p], lr=0.001)
        opt.step([np.array([0.5])])
        # Bias-corrected m_hat/sqrt(v_hat) = sign(g) up to eps.
        assert abs(abs(p[0]) - 0.001) < 1e-6
        assert p[0] < 0

    def test_two_steps_match_scalar_oracle(self):
        # Oracle: the update equations evaluated directly on scalars.
        lr, b1, b2, eps = 0.001, 0.9, 0.999, 1e-8
        theta, m, v = 0.3, 0.0, 0.0
        for t, g in [(1, 1.0), (2, -1.0)]:
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g * g
            theta -= lr * (m / (1 - b1**t)) / (np.sqrt(v / (1 - b2**t)) + eps)

        p = np.array([0.3])
        opt = Adam([p], lr=lr, beta1=b1, beta2=b2, eps=eps)
        opt.step([np.array([1.0])])
        opt.step([np.array([-1.0])])
        assert abs(p[0] - theta) < 1e-12
        assert opt.step_count == 2

    def test_shape_mismatch(self):
        opt = Adam([np.zeros(3)])
        with pytest.raises(ShapeMismatch):
            opt.step([np.zeros(4)])


class TestDeterminismAndPersistence:
    def _train_briefly(self, seed):
        rng = np.random.default_rng(seed)
        stack = Sequential([Dense(4, 8, rng=rng), ReLU(), Dense(8, 2, rng=rng)])
        opt = Adam(stack.params())
        x = np.random.default_rng(99).normal(size=(10, 4))
        y = np.random.default_rng(98).normal(size=(10, 2))
        for _ in range(5):
            out = stack.forward(x)
            _, grad = mse_loss(out, y)
            stack.backward(grad)
            opt.step(stack.grads())
        return stack

    def test_identical_seed_bit_identical_params(self):
        a = self._train_briefly(7)
        b = self._train_briefly(7)
        for pa, pb in zip(a.params(), b.params()):
            np.testing.assert_array_equal(pa, pb)

    def test_save_load_roundtrip(self, tmp_path):
        rng = np.random.default_rng(3)
        stack = Sequential(
            [Conv2D(2, 4, 3, rng=rng), ReLU(), MaxPool2D(2, 2), Flatten(), Dense(16, 3, rng=rng)]
        )
        save_model(stack, tmp_path / "m.json", tmp_path / "m.bin")
        loaded, manifest = load_model(tmp_path / "m.json", tmp_path / "m.bin")
        x = rng.normal(size=(2, 4, 4, 2))
        # f32 persistence: compare at float32 resolution.
        np.testing.assert_allclose(
            loaded.forward(x), stack.forward(x), rtol=1e-5, atol=1e-6
        )
        assert [e["kind"] for e in manifest["layers"]] == [
            "conv2d",
            "relu",
            "maxpool2d",
            "flatten",
            "dense",
        ]
