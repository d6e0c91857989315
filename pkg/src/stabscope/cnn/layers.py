"""Network layers with explicit forward/backward passes.

Inputs are (batch, channels, *spatial) float64 arrays; spatial rank is 2 for
bitmap snapshots and 3 for letter volumes.  Convolutions use "same" zero
padding and stride 1, realized as an im2col reshape plus one matrix product.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class Layer:
    """Base class: stateless unless it owns parameters."""

    params: dict[str, np.ndarray]
    grads: dict[str, np.ndarray]

    def __init__(self):
        self.params = {}
        self.grads = {}

    def forward(self, x: np.ndarray, train: bool = False, rng=None) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dy: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # parameters subject to the L2 penalty (weights, never biases)
    def weight_keys(self) -> tuple[str, ...]:
        return ()


class Conv(Layer):
    """Same-padded stride-1 convolution over 2 or 3 spatial axes."""

    def __init__(self, in_channels: int, out_channels: int, kernel: tuple[int, ...], rng):
        super().__init__()
        self.kernel = tuple(int(k) for k in kernel)
        self.rank = len(self.kernel)
        if self.rank not in (2, 3):
            raise ValueError("only rank-2 or rank-3 convolutions are supported")
        fan_in = in_channels * int(np.prod(self.kernel))
        self.params["w"] = rng.normal(
            0.0, np.sqrt(2.0 / fan_in), size=(out_channels, in_channels, *self.kernel)
        )
        self.params["b"] = np.zeros(out_channels)
        self._cols = None
        self._x_shape = None

    def weight_keys(self):
        return ("w",)

    def _pad(self, x):
        pads = [(0, 0), (0, 0)]
        for k in self.kernel:
            pads.append(((k - 1) // 2, k // 2))
        return np.pad(x, pads)

    def forward(self, x, train=False, rng=None):
        if x.ndim != 2 + self.rank:
            raise ValueError(f"expected {2 + self.rank}-d input, got shape {x.shape}")
        w = self.params["w"]
        if x.shape[1] != w.shape[1]:
            raise ValueError("channel count mismatch")
        b, c = x.shape[:2]
        spatial = x.shape[2:]
        xp = self._pad(x)
        windows = sliding_window_view(xp, self.kernel, axis=tuple(range(2, 2 + self.rank)))
        # (B, C, *spatial, *kernel) -> (B, *spatial, C, *kernel)
        order = (0, *range(2, 2 + self.rank), 1, *range(2 + self.rank, 2 + 2 * self.rank))
        cols = windows.transpose(order).reshape(b * int(np.prod(spatial)), -1)
        out = cols @ w.reshape(w.shape[0], -1).T + self.params["b"]
        out = out.reshape(b, *spatial, w.shape[0])
        out = np.moveaxis(out, -1, 1)
        if train:
            self._cols = cols
            self._x_shape = x.shape
        else:
            self._cols = None
        return np.ascontiguousarray(out)

    def backward(self, dy):
        if self._cols is None:
            raise RuntimeError("backward before training-mode forward")
        w = self.params["w"]
        b = self._x_shape[0]
        spatial = self._x_shape[2:]
        n_pos = int(np.prod(spatial))
        dy_cols = np.moveaxis(dy, 1, -1).reshape(b * n_pos, w.shape[0])
        self.grads["w"] = (dy_cols.T @ self._cols).reshape(w.shape)
        self.grads["b"] = dy_cols.sum(axis=0)
        dcols = dy_cols @ w.reshape(w.shape[0], -1)
        dcols = dcols.reshape(b, *spatial, w.shape[1], *self.kernel)
        dcols = np.moveaxis(dcols, 1 + self.rank, 1)
        pads = [(k - 1) // 2 for k in self.kernel]
        dxp = np.zeros(
            (b, w.shape[1], *(s + k - 1 for s, k in zip(spatial, self.kernel)))
        )
        for offsets in np.ndindex(*self.kernel):
            sl = (slice(None), slice(None)) + tuple(
                slice(o, o + s) for o, s in zip(offsets, spatial)
            )
            dxp[sl] += dcols[(Ellipsis, *offsets)]
        crop = (slice(None), slice(None)) + tuple(
            slice(p, p + s) for p, s in zip(pads, spatial)
        )
        self._cols = None
        return dxp[crop]


class ReLU(Layer):
    def __init__(self):
        super().__init__()
        self._mask = None

    def forward(self, x, train=False, rng=None):
        if train:
            self._mask = x > 0
        return np.maximum(x, 0.0)

    def backward(self, dy):
        return dy * self._mask


class MaxPool(Layer):
    """Floor-mode max pooling with a per-axis window; remainders are cropped.

    A window larger than the axis collapses the whole axis, so tiny inputs
    still pool to one cell.
    """

    def __init__(self, window: tuple[int, ...]):
        super().__init__()
        self.window = tuple(int(w) for w in window)
        self._cache = None

    def forward(self, x, train=False, rng=None):
        spatial = x.shape[2:]
        if len(spatial) != len(self.window):
            raise ValueError("pooling window rank must match spatial rank")
        eff = tuple(min(w, s) for w, s in zip(self.window, spatial))
        outs = tuple(s // w for s, w in zip(spatial, eff))
        crop = (slice(None), slice(None)) + tuple(slice(0, o * w) for o, w in zip(outs, eff))
        xc = x[crop]
        shape = [x.shape[0], x.shape[1]]
        for o, w in zip(outs, eff):
            shape += [o, w]
        xr = xc.reshape(shape)
        # bring the window axes together at the end
        rank = len(spatial)
        order = [0, 1] + [2 + 2 * i for i in range(rank)] + [3 + 2 * i for i in range(rank)]
        xr = xr.transpose(order).reshape(
            x.shape[0], x.shape[1], *outs, int(np.prod(eff))
        )
        idx = xr.argmax(axis=-1)
        out = np.take_along_axis(xr, idx[..., None], axis=-1)[..., 0]
        if train:
            self._cache = (x.shape, eff, outs, idx)
        return out

    def backward(self, dy):
        x_shape, eff, outs, idx = self._cache
        rank = len(eff)
        flat = np.zeros((*dy.shape, int(np.prod(eff))))
        np.put_along_axis(flat, idx[..., None], dy[..., None], axis=-1)
        flat = flat.reshape(*dy.shape, *eff)
        # interleave (out_i, w_i) axis pairs again
        order = [0, 1]
        for i in range(rank):
            order += [2 + i, 2 + rank + i]
        blocks = flat.transpose(order).reshape(
            x_shape[0], x_shape[1], *(o * w for o, w in zip(outs, eff))
        )
        dx = np.zeros(x_shape)
        crop = (slice(None), slice(None)) + tuple(slice(0, o * w) for o, w in zip(outs, eff))
        dx[crop] = blocks
        return dx


class GlobalAvgPool(Layer):
    """Average over every spatial axis, leaving (batch, channels)."""

    def __init__(self):
        super().__init__()
        self._shape = None

    def forward(self, x, train=False, rng=None):
        if train:
            self._shape = x.shape
        return x.mean(axis=tuple(range(2, x.ndim)))

    def backward(self, dy):
        shape = self._shape
        scale = 1.0 / int(np.prod(shape[2:]))
        return np.broadcast_to(
            dy.reshape(dy.shape + (1,) * (len(shape) - 2)), shape
        ) * scale


class Flatten(Layer):
    def __init__(self):
        super().__init__()
        self._shape = None

    def forward(self, x, train=False, rng=None):
        if train:
            self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dy):
        return dy.reshape(self._shape)


class Dense(Layer):
    def __init__(self, in_features: int, out_features: int, rng, relu_gain: bool = True):
        super().__init__()
        scale = np.sqrt((2.0 if relu_gain else 1.0) / in_features)
        self.params["w"] = rng.normal(0.0, scale, size=(in_features, out_features))
        self.params["b"] = np.zeros(out_features)
        self._x = None

    def weight_keys(self):
        return ("w",)

    def forward(self, x, train=False, rng=None):
        if train:
            self._x = x
        return x @ self.params["w"] + self.params["b"]

    def backward(self, dy):
        self.grads["w"] = self._x.T @ dy
        self.grads["b"] = dy.sum(axis=0)
        return dy @ self.params["w"].T


class Dropout(Layer):
    """Inverted dropout: scales kept units at train time, identity at eval."""

    def __init__(self, rate: float):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ValueError("dropout rate must be in [0, 1)")
        self.rate = rate
        self._mask = None

    def forward(self, x, train=False, rng=None):
        if not train or self.rate == 0.0:
            return x
        if rng is None:
            raise ValueError("dropout needs an RNG in training mode")
        self._mask = (rng.random(x.shape) >= self.rate) / (1.0 - self.rate)
        return x * self._mask

    def backward(self, dy):
        if self._mask is None:
            return dy
        return dy * self._mask


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def bce_loss(p: np.ndarray, y: np.ndarray, params=None, l2_coeff: float = 0.0) -> float:
    """Mean binary cross-entropy with an optional L2 penalty on weights.

    Predictions are clamped to [1e-7, 1 - 1e-7]; the penalty counts weight
    tensors only (pass an iterable of arrays), never biases.
    """
    pc = np.clip(p, 1e-7, 1.0 - 1e-7)
    loss = float(np.mean(-(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc))))
    if params is not None and l2_coeff:
        loss += l2_coeff * float(sum(np.sum(w * w) for w in params))
    return loss
