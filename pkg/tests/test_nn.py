import numpy as np
import pytest

from cfardetect import nn
from cfardetect.checks import layer_gradient_checks, numeric_grad


def rng_for(seed):
    return np.random.default_rng(seed)


class TestConv1d:
    def test_identity_kernel(self):
        layer = nn.Conv1d(1, 1, 3, rng=rng_for(0))
        layer.weight.value[:] = 0.0
        layer.weight.value[0, 0, 1] = 1.0  # center tap only
        x = rng_for(1).normal(size=(2, 1, 8))
        assert np.allclose(layer.forward(x, training=True), x)

    def test_shift_kernel_zero_padding(self):
        layer = nn.Conv1d(1, 1, 3, rng=rng_for(0))
        layer.weight.value[:] = 0.0
        layer.weight.value[0, 0, 0] = 1.0  # left tap: output[t] = x[t-1]
        x = np.arange(5.0)[None, None, :]
        y = layer.forward(x, training=True)
        assert np.allclose(y[0, 0], [0, 0, 1, 2, 3])

    def test_no_bias_parameter(self):
        layer = nn.Conv1d(2, 3, 3, rng=rng_for(0))
        assert len(layer.params()) == 1

    def test_linearity(self):
        layer = nn.Conv1d(2, 4, 3, rng=rng_for(2))
        x = rng_for(3).normal(size=(3, 2, 6))
        y = rng_for(4).normal(size=(3, 2, 6))
        fx = layer.forward(x, training=True)
        fy = layer.forward(y, training=True)
        fxy = layer.forward(2.0 * x - y, training=True)
        assert np.allclose(fxy, 2.0 * fx - fy)

    def test_init_range(self):
        layer = nn.Conv1d(8, 4, 3, rng=rng_for(5))
        bound = np.sqrt(6.0 / (8 * 3))
        w = layer.weight.value
        assert np.all(np.abs(w) <= bound)
        assert w.std() > 0.1 * bound


class TestBatchNormScale:
    def test_training_output_unit_variance(self):
        layer = nn.BatchNormScale(3)
        x = rng_for(6).normal(loc=5.0, scale=3.0, size=(64, 3, 10))
        y = layer.forward(x, training=True)
        assert np.all(np.abs(y.mean(axis=(0, 2))) < 1e-10)
        assert np.all(np.abs(y.var(axis=(0, 2)) - 1.0) < 1e-4)  # up to eps

    def test_running_stats_track_batches(self):
        layer = nn.BatchNormScale(2)
        x = rng_for(7).normal(loc=2.0, size=(256, 2, 4))
        for _ in range(200):
            layer.forward(x, training=True)
        assert np.all(np.abs(layer.running_mean - x.mean(axis=(0, 2))) < 0.01)

    def test_eval_uses_running_stats(self):
        layer = nn.BatchNormScale(2)
        x = rng_for(8).normal(size=(32, 2, 4))
        layer.forward(x, training=True)
        y1 = layer.forward(x, training=False)
        y2 = layer.forward(x, training=False)
        assert np.array_equal(y1, y2)

    def test_scale_only_no_shift(self):
        # eval output is scale * (x - running_mean)/sqrt(var + eps): doubling
        # the scale doubles the output, and there is exactly one parameter
        layer = nn.BatchNormScale(2)
        x = rng_for(9).normal(size=(16, 2, 4))
        layer.forward(x, training=True)
        base = layer.forward(x, training=False)
        layer.scale.value *= 2.0
        assert np.allclose(layer.forward(x, training=False), 2.0 * base)
        assert len(layer.params()) == 1


class TestLeakyReLU:
    def test_values(self):
        layer = nn.LeakyReLU(0.01)
        x = np.array([[-2.0, 0.0, 3.0]])
        assert np.allclose(layer.forward(x, training=True), [[-0.02, 0.0, 3.0]])

    def test_gradient_passthrough(self):
        layer = nn.LeakyReLU(0.01)
        x = np.array([[-1.0, 2.0]])
        layer.forward(x, training=True)
        g = layer.backward(np.ones_like(x))
        assert np.allclose(g, [[0.01, 1.0]])


class TestMaxPool1d:
    def test_values(self):
        layer = nn.MaxPool1d()
        x = np.array([[[1.0, 3.0, 2.0, 2.0, -1.0, 0.0]]])
        assert np.allclose(layer.forward(x, training=True), [[[3.0, 2.0, 0.0]]])

    def test_gradient_routing(self):
        layer = nn.MaxPool1d()
        x = np.array([[[1.0, 3.0, 5.0, 2.0]]])
        layer.forward(x, training=True)
        g = layer.backward(np.array([[[10.0, 20.0]]]))
        assert np.allclose(g, [[[0.0, 10.0, 20.0, 0.0]]])


class TestGlobalAvgPool:
    def test_values(self):
        layer = nn.GlobalAvgPool()
        x = np.array([[[1.0, 3.0], [0.0, -2.0]]])
        assert np.allclose(layer.forward(x, training=True), [[2.0, -1.0]])

    def test_gradient_spread(self):
        layer = nn.GlobalAvgPool()
        x = rng_for(10).normal(size=(2, 3, 4))
        layer.forward(x, training=True)
        g = layer.backward(np.ones((2, 3)))
        assert np.allclose(g, 0.25)


class TestLinear:
    def test_matrix_action(self):
        layer = nn.Linear(2, 2, rng=rng_for(11))
        layer.weight.value = np.array([[1.0, 2.0], [0.0, -1.0]])
        y = layer.forward(np.array([[3.0, 4.0]]), training=True)
        assert np.allclose(y, [[11.0, -4.0]])

    def test_no_bias(self):
        layer = nn.Linear(4, 3, rng=rng_for(12))
        assert len(layer.params()) == 1
        zero = layer.forward(np.zeros((2, 4)), training=True)
        assert np.all(zero == 0.0)


class TestAdam:
    def test_first_step_is_signed_lr(self):
        # with bias correction the first update is lr * sign(grad) for any
        # gradient magnitude
        p = nn.Parameter(np.array([1.0, -1.0]))
        p.grad = np.array([1e-3, -10.0])
        opt = nn.Adam([p])
        opt.step(lr=0.1)
        assert np.allclose(p.value, [1.0 - 0.1, -1.0 + 0.1], atol=1e-6)

    def test_converges_on_quadratic(self):
        p = nn.Parameter(np.array([5.0]))
        opt = nn.Adam([p])
        for _ in range(2000):
            p.grad = 2.0 * p.value
            opt.step(lr=0.05)
        assert abs(p.value[0]) < 1e-3


class TestFiniteDifference:
    """Independent central-difference checks on each layer's backward pass."""

    def test_numeric_grad_on_quadratic(self):
        f = lambda x: float(np.sum(x ** 2))
        x = np.array([1.0, -2.0, 3.0])
        assert np.allclose(numeric_grad(f, x), 2.0 * x, atol=1e-6)

    def test_all_layer_checks_pass(self):
        rows = layer_gradient_checks(n_configs=20, seed0=4321)
        assert len(rows) >= 20
        names = {r[0].split("[")[0] for r in rows}
        assert {"conv", "batchnorm", "leaky_relu", "maxpool",
                "avgpool", "linear", "loss"} <= names
        for name, err in rows:
            assert err < 1e-4, f"{name}: rel err {err}"


class TestSequential:
    def test_zero_grad_clears_all(self):
        net = nn.Sequential([
            nn.Conv1d(1, 2, 3, rng=rng_for(13)),
            nn.LeakyReLU(0.01),
            nn.Linear(2, 2, rng=rng_for(14)),
        ])
        x = rng_for(15).normal(size=(2, 1, 4))
        h = net.layers[0].forward(x, training=True)
        h = net.layers[1].forward(h, training=True)
        g1 = net.layers[1].backward(np.ones_like(h))
        net.layers[0].backward(g1)
        assert any(np.any(p.grad != 0) for p in net.params())
        net.zero_grad()
        assert all(np.all(p.grad == 0) for p in net.params())
