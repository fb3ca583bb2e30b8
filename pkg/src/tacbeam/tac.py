"""Transform-average-concatenate: a channel-set layer with a residual path.

Input features are shaped (..., N, T, K): N channels, T time steps, K
features. Per time step, each channel is transformed by a shared FC+PReLU,
the transformed channels are averaged and passed through a second FC+PReLU,
and the pooled vector is concatenated back onto every channel and mapped to
K features by a third FC+PReLU that is added to the input.
"""
import numpy as np

from tacbeam.nn import Linear, Module, PReLU


class FCPReLU(Module):
    def __init__(self, in_dim, out_dim, rng):
        super().__init__()
        self.fc = Linear(in_dim, out_dim, rng)
        self.act = PReLU()

    def forward(self, x):
        z, c1 = self.fc.forward(x)
        y, c2 = self.act.forward(z)
        return y, (c1, c2)

    def backward(self, dy, cache):
        c1, c2 = cache
        return self.fc.backward(self.act.backward(dy, c2), c1)


class TAC(Module):
    """TAC over the channel axis (-3). ``hidden`` defaults to 3 * ``dim``."""

    def __init__(self, dim, rng, hidden=None):
        super().__init__()
        hidden = hidden or 3 * dim
        self.dim = dim
        self.hidden = hidden
        self.transform = FCPReLU(dim, hidden, rng)
        self.average = FCPReLU(hidden, hidden, rng)
        self.concat = FCPReLU(2 * hidden, dim, rng)

    def forward(self, z):
        if z.ndim < 3:
            raise ValueError("TAC expects (..., N, T, K) features")
        if z.shape[-1] != self.dim:
            raise ValueError(f"feature dim {z.shape[-1]} != TAC dim {self.dim}")
        f, c_p = self.transform.forward(z)
        pooled, c_r = self.average.forward(f.mean(axis=-3, keepdims=True))
        both = np.concatenate([f, np.broadcast_to(pooled, f.shape)], axis=-1)
        g, c_s = self.concat.forward(both)
        return z + g, (z.shape[-3], c_p, c_r, c_s)

    def backward(self, dy, cache):
        n, c_p, c_r, c_s = cache
        dboth = self.concat.backward(dy, c_s)
        H = self.hidden
        df = dboth[..., :H]
        dpooled = dboth[..., H:].sum(axis=-3, keepdims=True)
        dmean = self.average.backward(dpooled, c_r)
        df = df + dmean / n
        return dy + self.transform.backward(df, c_p)


def tac_forward(Z, module):
    """Apply ``module`` to a channel feature set (N, T, K) or batched (..., N, T, K)."""
    return module.forward(np.asarray(Z, dtype=np.float64))[0]
