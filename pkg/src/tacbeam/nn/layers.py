"""Layers with hand-written reverse-mode gradients.

Every layer acts on the last axis and treats all leading axes as batch.
Recurrent layers take sequences shaped (..., T, D) with time on axis -2.
"""
import numpy as np

from tacbeam import kernels
from tacbeam.nn.core import Module


def _flat(a):
    return a.reshape(-1, a.shape[-1])


class Linear(Module):
    """y = x W + b, weights uniform in +-1/sqrt(in_dim)."""

    def __init__(self, in_dim, out_dim, rng, bias=True):
        super().__init__()
        if in_dim < 1 or out_dim < 1:
            raise ValueError("Linear dims must be positive")
        bound = 1.0 / np.sqrt(in_dim)
        self.W = self.param(rng.uniform(-bound, bound, (in_dim, out_dim)))
        self.b = self.param(rng.uniform(-bound, bound, out_dim)) if bias else None

    @property
    def in_dim(self):
        return self.W.shape[0]

    @property
    def out_dim(self):
        return self.W.shape[1]

    def forward(self, x):
        if x.shape[-1] != self.in_dim:
            raise ValueError(f"expected last dim {self.in_dim}, got {x.shape[-1]}")
        y = x @ self.W.values
        if self.b is not None:
            y = y + self.b.values
        return y, x

    def backward(self, dy, cache):
        x = cache
        self.W.grads += _flat(x).T @ _flat(dy)
        if self.b is not None:
            self.b.grads += _flat(dy).sum(0)
        return dy @ self.W.values.T


class PReLU(Module):
    """Parametric ReLU; one shared slope by default, or one per feature."""

    def __init__(self, num_parameters=1, init=0.25):
        super().__init__()
        self.a = self.param(np.full(num_parameters, init))

    def forward(self, x):
        a = self.a.values if self.a.shape[0] > 1 else self.a.values[0]
        return np.where(x >= 0, x, a * x), x

    def backward(self, dy, cache):
        x = cache
        neg = x < 0
        contrib = np.where(neg, x * dy, 0.0)
        if self.a.shape[0] > 1:
            self.a.grads += _flat(contrib).sum(0)
            a = self.a.values
        else:
            self.a.grads[0] += contrib.sum()
            a = self.a.values[0]
        return np.where(neg, a * dy, dy)


class Tanh(Module):
    def forward(self, x):
        y = np.tanh(x)
        return y, y

    def backward(self, dy, cache):
        return dy * (1.0 - cache * cache)


class LayerNorm(Module):
    """Normalize over the last axis (eps 1e-5), then per-feature affine."""

    def __init__(self, dim, eps=1e-5):
        super().__init__()
        self.eps = eps
        self.gain = self.param(np.ones(dim))
        self.bias = self.param(np.zeros(dim))

    def forward(self, x):
        mu = x.mean(-1, keepdims=True)
        xc = x - mu
        inv = 1.0 / np.sqrt((xc * xc).mean(-1, keepdims=True) + self.eps)
        xhat = xc * inv
        return xhat * self.gain.values + self.bias.values, (xhat, inv)

    def backward(self, dy, cache):
        xhat, inv = cache
        self.gain.grads += _flat(dy * xhat).sum(0)
        self.bias.grads += _flat(dy).sum(0)
        g = dy * self.gain.values
        return inv * (
            g - g.mean(-1, keepdims=True) - xhat * (g * xhat).mean(-1, keepdims=True)
        )


class LSTM(Module):
    """Unidirectional LSTM (gate order i, f, g, o) with zero initial state.

    Weights uniform in +-1/sqrt(hidden); forget-gate bias starts at 1.
    ``reverse=True`` runs right to left.
    """

    def __init__(self, in_dim, hidden, rng, reverse=False):
        super().__init__()
        if hidden < 1:
            raise ValueError("hidden size must be positive")
        self.hidden = hidden
        self.reverse = reverse
        bound = 1.0 / np.sqrt(hidden)
        self.Wx = self.param(rng.uniform(-bound, bound, (in_dim, 4 * hidden)))
        self.Wh = self.param(rng.uniform(-bound, bound, (hidden, 4 * hidden)))
        b = rng.uniform(-bound, bound, 4 * hidden)
        b[hidden : 2 * hidden] = 1.0
        self.b = self.param(b)

    def forward(self, x):
        # x: (T, B, D), time-major
        if x.shape[0] < 1:
            raise ValueError("empty sequence")
        if self.reverse:
            x = x[::-1]
        x = np.ascontiguousarray(x)
        xg = np.ascontiguousarray(x @ self.Wx.values + self.b.values)
        h, c, acts = kernels.lstm_forward(xg, self.Wh.values)
        out = h[::-1] if self.reverse else h
        return out, (x, h, c, acts)

    def backward(self, dy, cache):
        x, h, c, acts = cache
        if self.reverse:
            dy = dy[::-1]
        dxg = kernels.lstm_backward(np.ascontiguousarray(dy), c, acts, self.Wh.values)
        self.Wx.grads += _flat(x).T @ _flat(dxg)
        self.b.grads += _flat(dxg).sum(0)
        if h.shape[0] > 1:
            self.Wh.grads += _flat(h[:-1]).T @ _flat(dxg[1:])
        dx = dxg @ self.Wx.values.T
        return dx[::-1] if self.reverse else dx


class BiLSTM(Module):
    """Forward and backward LSTMs over axis -2, outputs concatenated (..., T, 2H)."""

    def __init__(self, in_dim, hidden, rng):
        super().__init__()
        self.fwd = LSTM(in_dim, hidden, rng)
        self.bwd = LSTM(in_dim, hidden, rng, reverse=True)

    @property
    def out_dim(self):
        return 2 * self.fwd.hidden

    def forward(self, x):
        lead = x.shape[:-2]
        T, D = x.shape[-2:]
        if T < 1:
            raise ValueError("empty sequence")
        xt = np.ascontiguousarray(x.reshape(-1, T, D).transpose(1, 0, 2))
        hf, cf = self.fwd.forward(xt)
        hb, cb = self.bwd.forward(xt)
        y = np.concatenate([hf, hb], -1).transpose(1, 0, 2)
        return y.reshape(lead + (T, -1)), (lead, cf, cb)

    def backward(self, dy, cache):
        lead, cf, cb = cache
        T = dy.shape[-2]
        H = self.fwd.hidden
        dt = dy.reshape(-1, T, 2 * H).transpose(1, 0, 2)
        dx = self.fwd.backward(dt[..., :H], cf) + self.bwd.backward(dt[..., H:], cb)
        return dx.transpose(1, 0, 2).reshape(lead + (T, -1))
