"""Minimal dense layer stack with exact reverse-mode gradients.

Conventions: batched channels-last layout (N, H, W, C) for spatial layers,
(N, D) for dense layers. Conv/deconv use stride 1 with "same" zero padding.
Each layer caches its forward activations; backward consumes the cache and
accumulates parameter gradients on the layer.
"""
from __future__ import annotations

import numpy as np

from ..errors import NoCachedForward, ShapeMismatch


def glorot_uniform(rng: np.random.Generator, shape, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def _im2col(x: np.ndarray, kh: int, kw: int) -> np.ndarray:
    """Same-padded patch matrix: (N,H,W,Cin) -> (N*H*W, kh*kw*Cin)."""
    ph, pw = kh // 2, kw // 2
    n, h, wd, c = x.shape
    xp = np.pad(x, ((0, 0), (ph, ph), (pw, pw), (0, 0)))
    win = np.lib.stride_tricks.sliding_window_view(xp, (kh, kw), axis=(1, 2))
    return win.transpose(0, 1, 2, 4, 5, 3).reshape(n * h * wd, kh * kw * c)


def _conv_input_grad(grad: np.ndarray, w: np.ndarray, x_shape: tuple) -> np.ndarray:
    """Input gradient of same-padded cross-correlation with kernel w."""
    kh, kw = w.shape[:2]
    ph, pw = kh // 2, kw // 2
    n, h, wd, c = x_shape
    dxp = np.zeros((n, h + 2 * ph, wd + 2 * pw, c), dtype=grad.dtype)
    for i in range(kh):
        for j in range(kw):
            dxp[:, i : i + h, j : j + wd, :] += grad @ w[i, j].T
    return dxp[:, ph : ph + h, pw : pw + wd, :]


class Layer:
    """Base layer; subclasses implement forward/backward and expose params."""

    kind = "base"

    def __init__(self):
        self._cache = None

    def params(self) -> list[np.ndarray]:
        return []

    def grads(self) -> list[np.ndarray]:
        return []

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _need_cache(self):
        if self._cache is None:
            raise NoCachedForward(f"{self.kind}: backward before forward")
        return self._cache

    def hyperparams(self) -> dict:
        return {}


class Conv2D(Layer):
    kind = "conv2d"

    def __init__(self, in_channels, out_channels, kernel=3, rng=None, dtype="float64"):
        super().__init__()
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = kernel
        self.dtype = np.dtype(dtype)
        fan_in = kernel * kernel * in_channels
        fan_out = kernel * kernel * out_channels
        rng = rng or np.random.default_rng(0)
        self.w = glorot_uniform(
            rng, (kernel, kernel, in_channels, out_channels), fan_in, fan_out
        ).astype(self.dtype)
        self.b = np.zeros(out_channels, dtype=self.dtype)
        self.dw = np.zeros_like(self.w)
        self.db = np.zeros_like(self.b)

    def params(self):
        return [self.w, self.b]

    def grads(self):
        return [self.dw, self.db]

    def hyperparams(self):
        return {
            "in_channels": self.in_channels,
            "out_channels": self.out_channels,
            "kernel": self.kernel,
            "dtype": str(self.dtype),
        }

    def forward(self, x):
        if x.ndim != 4 or x.shape[3] != self.in_channels:
            raise ShapeMismatch(
                f"conv2d expects (N,H,W,{self.in_channels}), got {x.shape}"
            )
        x = x.astype(self.dtype, copy=False)
        col = _im2col(x, self.kernel, self.kernel)
        self._cache = (x.shape, col)
        out = col @ self.w.reshape(-1, self.out_channels)
        return out.reshape(x.shape[:3] + (self.out_channels,)) + self.b

    def backward(self, grad):
        x_shape, col = self._need_cache()
        grad = grad.astype(self.dtype, copy=False)
        g2 = grad.reshape(-1, self.out_channels)
        self.dw[...] = (col.T @ g2).reshape(self.w.shape)
        self.db[...] = g2.sum(axis=0)
        return _conv_input_grad(grad, self.w, x_shape)


class Deconv2D(Conv2D):
    """Stride-1 transposed convolution with same padding.

    Equivalent to correlating with the spatially flipped kernel; kept as a
    distinct kind so the decoder mirrors the encoder layer-for-layer.
    """

    kind = "deconv2d"

    def forward(self, x):
        if x.ndim != 4 or x.shape[3] != self.in_channels:
            raise ShapeMismatch(
                f"deconv2d expects (N,H,W,{self.in_channels}), got {x.shape}"
            )
        x = x.astype(self.dtype, copy=False)
        col = _im2col(x, self.kernel, self.kernel)
        self._cache = (x.shape, col)
        wf = self.w[::-1, ::-1].reshape(-1, self.out_channels)
        out = col @ wf
        return out.reshape(x.shape[:3] + (self.out_channels,)) + self.b

    def backward(self, grad):
        x_shape, col = self._need_cache()
        grad = grad.astype(self.dtype, copy=False)
        g2 = grad.reshape(-1, self.out_channels)
        dwf = (col.T @ g2).reshape(self.w.shape)
        self.dw[...] = dwf[::-1, ::-1]
        self.db[...] = g2.sum(axis=0)
        return _conv_input_grad(grad, self.w[::-1, ::-1], x_shape)


class MaxPool2D(Layer):
    kind = "maxpool2d"

    def __init__(self, pool_h, pool_w):
        super().__init__()
        self.pool_h = pool_h
        self.pool_w = pool_w

    def hyperparams(self):
        return {"pool_h": self.pool_h, "pool_w": self.pool_w}

    def forward(self, x):
        n, h, w, c = x.shape
        ph, pw = self.pool_h, self.pool_w
        if h % ph or w % pw:
            raise ShapeMismatch(f"({h},{w}) not divisible by pool ({ph},{pw})")
        win = (
            x.reshape(n, h // ph, ph, w // pw, pw, c)
            .transpose(0, 1, 3, 2, 4, 5)
            .reshape(n, h // ph, w // pw, ph * pw, c)
        )
        # np.argmax returns the first maximum: row-major tie-break per window.
        arg = win.argmax(axis=3)
        self._cache = (x.shape, arg)
        return np.take_along_axis(win, arg[:, :, :, None, :], axis=3)[:, :, :, 0, :]

    def backward(self, grad):
        (n, h, w, c), arg = self._need_cache()
        ph, pw = self.pool_h, self.pool_w
        dwin = np.zeros((n, h // ph, w // pw, ph * pw, c))
        np.put_along_axis(dwin, arg[:, :, :, None, :], grad[:, :, :, None, :], axis=3)
        return (
            dwin.reshape(n, h // ph, w // pw, ph, pw, c)
            .transpose(0, 1, 3, 2, 4, 5)
            .reshape(n, h, w, c)
        )


class Upsample2D(Layer):
    """Nearest-neighbor repetition."""

    kind = "upsample2d"

    def __init__(self, factor_h, factor_w):
        super().__init__()
        self.factor_h = factor_h
        self.factor_w = factor_w

    def hyperparams(self):
        return {"factor_h": self.factor_h, "factor_w": self.factor_w}

    def forward(self, x):
        self._cache = x.shape
        return x.repeat(self.factor_h, axis=1).repeat(self.factor_w, axis=2)

    def backward(self, grad):
        n, h, w, c = self._need_cache()
        fh, fw = self.factor_h, self.factor_w
        return grad.reshape(n, h, fh, w, fw, c).sum(axis=(2, 4))


class ReLU(Layer):
    kind = "relu"

    def forward(self, x):
        self._cache = x > 0
        return np.where(self._cache, x, 0.0)

    def backward(self, grad):
        return grad * self._need_cache()


class Flatten(Layer):
    kind = "flatten"

    def forward(self, x):
        self._cache = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad):
        return grad.reshape(self._need_cache())


class Dense(Layer):
    kind = "dense"

    def __init__(self, in_dim, out_dim, bias=True, rng=None):
        super().__init__()
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.bias = bias
        rng = rng or np.random.default_rng(0)
        self.w = glorot_uniform(rng, (in_dim, out_dim), in_dim, out_dim)
        self.dw = np.zeros_like(self.w)
        if bias:
            self.b = np.zeros(out_dim)
            self.db = np.zeros_like(self.b)

    def params(self):
        return [self.w, self.b] if self.bias else [self.w]

    def grads(self):
        return [self.dw, self.db] if self.bias else [self.dw]

    def hyperparams(self):
        return {"in_dim": self.in_dim, "out_dim": self.out_dim, "bias": self.bias}

    def forward(self, x):
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ShapeMismatch(f"dense expects (N,{self.in_dim}), got {x.shape}")
        self._cache = x
        out = x @ self.w
        if self.bias:
            out = out + self.b
        return out

    def backward(self, grad):
        x = self._need_cache()
        self.dw[...] = x.T @ grad
        if self.bias:
            self.db[...] = grad.sum(axis=0)
        return grad @ self.w.T


class Softmax(Layer):
    """Exp-normalize over the last axis."""

    kind = "softmax"

    def forward(self, x):
        z = x - x.max(axis=-1, keepdims=True)
        e = np.exp(z)
        p = e / e.sum(axis=-1, keepdims=True)
        self._cache = p
        return p

    def backward(self, grad):
        p = self._need_cache()
        dot = (grad * p).sum(axis=-1, keepdims=True)
        return p * (grad - dot)


class Sequential:
    """Ordered layer container with whole-stack forward/backward."""

    def __init__(self, layers: list[Layer]):
        self.layers = layers

    def forward(self, x: np.ndarray) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, grad: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def params(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer.params()]

    def grads(self) -> list[np.ndarray]:
        return [g for layer in self.layers for g in layer.grads()]

    def __call__(self, x):
        return self.forward(x)
