"""Minimal neural-network layer stack with hand-written reverse-mode gradients.

Only what the hypersphere network needs: bias-free 1D convolution,
scale-only batch normalization, leaky ReLU, max pooling, global average
pooling, a bias-free linear map, and Adam. Everything runs in float64 and
is deterministic given the seed.

Each layer implements ``forward(x, training)`` and ``backward(dy)``;
``backward`` consumes the cache left by the immediately preceding forward
call (single-threaded use).
"""

import numpy as np

__all__ = [
    "Parameter",
    "Conv1d",
    "BatchNormScale",
    "LeakyReLU",
    "MaxPool1d",
    "GlobalAvgPool",
    "Linear",
    "Sequential",
    "Adam",
    "uniform_init",
]


class Parameter:
    """A trainable tensor and its gradient buffer."""

    def __init__(self, value):
        self.value = np.asarray(value, dtype=float)
        self.grad = np.zeros_like(self.value)

    @property
    def shape(self):
        return self.value.shape

    def zero_grad(self):
        self.grad[...] = 0.0


def uniform_init(shape, fan_in, rng):
    """Seeded uniform draw on +-sqrt(6 / fan_in)."""
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Conv1d:
    """Bias-free 1D convolution, stride 1, zero padding."""

    def __init__(self, c_in, c_out, kernel=3, pad=1, rng=None, weight=None):
        if weight is not None:
            w = np.asarray(weight, dtype=float)
        else:
            w = uniform_init((c_out, c_in, kernel), c_in * kernel, rng)
        self.weight = Parameter(w)
        self.pad = pad
        self._cache = None

    def params(self):
        return [self.weight]

    def forward(self, x, training=False):
        w = self.weight.value
        c_out, c_in, kernel = w.shape
        b, c, length = x.shape
        if c != c_in:
            raise ValueError(f"expected {c_in} input channels, got {c}")
        xp = np.pad(x, ((0, 0), (0, 0), (self.pad, self.pad)))
        l_out = length + 2 * self.pad - kernel + 1
        y = np.zeros((b, c_out, l_out))
        for t in range(kernel):
            y += np.einsum("oc,bcl->bol", w[:, :, t], xp[:, :, t:t + l_out])
        self._cache = (xp, length, l_out)
        return y

    def backward(self, dy):
        xp, length, l_out = self._cache
        w = self.weight.value
        kernel = w.shape[2]
        dxp = np.zeros_like(xp)
        for t in range(kernel):
            self.weight.grad[:, :, t] += np.einsum(
                "bol,bcl->oc", dy, xp[:, :, t:t + l_out])
            dxp[:, :, t:t + l_out] += np.einsum("oc,bol->bcl", w[:, :, t], dy)
        return dxp[:, :, self.pad:self.pad + length]


class BatchNormScale:
    """Batch normalization with a learnable per-channel scale and no shift.

    The missing shift term (together with bias-free layers elsewhere) blocks
    the trivial constant-map solution of the hypersphere objective. Running
    statistics use exponential averaging for evaluation-mode scoring.
    """

    def __init__(self, channels, momentum=0.1, eps=1e-5):
        self.scale = Parameter(np.ones(channels))
        self.momentum = momentum
        self.eps = eps
        self.running_mean = np.zeros(channels)
        self.running_var = np.ones(channels)
        self._cache = None

    def params(self):
        return [self.scale]

    def forward(self, x, training=False):
        if training:
            mu = x.mean(axis=(0, 2))
            var = x.var(axis=(0, 2))
            n = x.shape[0] * x.shape[2]
            unbiased = var * n / max(n - 1, 1)
            self.running_mean += self.momentum * (mu - self.running_mean)
            self.running_var += self.momentum * (unbiased - self.running_var)
        else:
            mu = self.running_mean
            var = self.running_var
        ivar = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mu[None, :, None]) * ivar[None, :, None]
        self._cache = (xhat, ivar, x.shape, training)
        return self.scale.value[None, :, None] * xhat

    def backward(self, dy):
        xhat, ivar, shape, training = self._cache
        self.scale.grad += np.einsum("bcl,bcl->c", dy, xhat)
        dxhat = dy * self.scale.value[None, :, None]
        if not training:
            return dxhat * ivar[None, :, None]
        n = shape[0] * shape[2]
        sum_dxhat = dxhat.sum(axis=(0, 2))
        sum_dxhat_xhat = np.einsum("bcl,bcl->c", dxhat, xhat)
        dx = (dxhat - (sum_dxhat[None, :, None]
                       + xhat * sum_dxhat_xhat[None, :, None]) / n)
        return dx * ivar[None, :, None]


class LeakyReLU:
    def __init__(self, slope=0.01):
        self.slope = slope
        self._cache = None

    def params(self):
        return []

    def forward(self, x, training=False):
        mask = x > 0
        self._cache = mask
        return np.where(mask, x, self.slope * x)

    def backward(self, dy):
        mask = self._cache
        return np.where(mask, dy, self.slope * dy)


class MaxPool1d:
    """Non-overlapping max pooling, window 2, stride 2."""

    def __init__(self):
        self._cache = None

    def params(self):
        return []

    def forward(self, x, training=False):
        b, c, length = x.shape
        if length % 2:
            raise ValueError("max pooling needs an even input length")
        xr = x.reshape(b, c, length // 2, 2)
        idx = xr.argmax(axis=3)
        self._cache = (idx, x.shape)
        return np.take_along_axis(xr, idx[..., None], axis=3)[..., 0]

    def backward(self, dy):
        idx, shape = self._cache
        b, c, length = shape
        dxr = np.zeros((b, c, length // 2, 2))
        np.put_along_axis(dxr, idx[..., None], dy[..., None], axis=3)
        return dxr.reshape(shape)


class GlobalAvgPool:
    """Adaptive average pooling to length 1; output drops the length axis."""

    def __init__(self):
        self._cache = None

    def params(self):
        return []

    def forward(self, x, training=False):
        self._cache = x.shape
        return x.mean(axis=2)

    def backward(self, dy):
        shape = self._cache
        return np.repeat(dy[:, :, None], shape[2], axis=2) / shape[2]


class Linear:
    """Bias-free fully connected map y = x W^T."""

    def __init__(self, c_in, c_out, rng=None, weight=None):
        if weight is not None:
            w = np.asarray(weight, dtype=float)
        else:
            w = uniform_init((c_out, c_in), c_in, rng)
        self.weight = Parameter(w)
        self._cache = None

    def params(self):
        return [self.weight]

    def forward(self, x, training=False):
        self._cache = x
        return x @ self.weight.value.T

    def backward(self, dy):
        x = self._cache
        self.weight.grad += dy.T @ x
        return dy @ self.weight.value


class Sequential:
    def __init__(self, layers):
        self.layers = list(layers)

    def params(self):
        return [p for layer in self.layers for p in layer.params()]

    def forward(self, x, training=False):
        for layer in self.layers:
            x = layer.forward(x, training=training)
        return x

    def backward(self, dy):
        for layer in reversed(self.layers):
            dy = layer.backward(dy)
        return dy

    def zero_grad(self):
        for p in self.params():
            p.zero_grad()


class Adam:
    """Adam with the usual bias correction; learning rate set per step."""

    def __init__(self, params, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = [np.zeros_like(p.value) for p in self.params]
        self.v = [np.zeros_like(p.value) for p in self.params]
        self.t = 0

    def step(self, lr):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for p, m, v in zip(self.params, self.m, self.v):
            m += (1 - b1) * (p.grad - m)
            v += (1 - b2) * (p.grad ** 2 - v)
            mhat = m / (1 - b1 ** self.t)
            vhat = v / (1 - b2 ** self.t)
            p.value -= lr * mhat / (np.sqrt(vhat) + self.eps)
