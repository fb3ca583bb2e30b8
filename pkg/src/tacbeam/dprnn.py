"""Dual-path recurrent filter-estimation stack with optional TAC.

Features (B, N, T, F) are projected to K dims, cut into half-overlapping
chunks of ``chunk`` frames, processed by blocks that run a BiLSTM inside
each chunk and then across chunks (each with a linear projection, layer
norm and residual), optionally followed by TAC across the N channels, and
finally merged back to T frames and mapped to filter coefficients.
"""
import numpy as np

from tacbeam.errors import NumericalError
from tacbeam.nn import BiLSTM, LayerNorm, Linear, Module, PReLU, Tanh
from tacbeam.tac import TAC


def _chunk_layout(T, chunk):
    hop = chunk // 2
    padded = T + 2 * hop
    rest = (padded - chunk) % hop
    if rest:
        padded += hop - rest
    return hop, padded, (padded - chunk) // hop + 1


def segment(x, chunk):
    """(..., T, K) -> (..., n_chunks, chunk, K) with 50% overlap and zero padding."""
    T = x.shape[-2]
    hop, padded, n = _chunk_layout(T, chunk)
    pad = [(0, 0)] * (x.ndim - 2) + [(hop, padded - T - hop), (0, 0)]
    xp = np.pad(x, pad)
    blocks = xp.reshape(x.shape[:-2] + (padded // hop, hop, x.shape[-1]))
    return np.concatenate([blocks[..., :n, :, :], blocks[..., 1 : n + 1, :, :]], axis=-2)


def merge(chunks, T):
    """Adjoint of :func:`segment`: sum overlapping chunks back onto T frames."""
    chunk = chunks.shape[-2]
    hop, padded, n = _chunk_layout(T, chunk)
    lead = chunks.shape[:-3]
    K = chunks.shape[-1]
    blocks = np.zeros(lead + (padded // hop, hop, K))
    blocks[..., :n, :, :] += chunks[..., :hop, :]
    blocks[..., 1 : n + 1, :, :] += chunks[..., hop:, :]
    return blocks.reshape(lead + (padded, K))[..., hop : hop + T, :]


class PathRNN(Module):
    """BiLSTM along axis -2, linear back to K, layer norm, residual add."""

    def __init__(self, dim, hidden, rng):
        super().__init__()
        self.rnn = BiLSTM(dim, hidden, rng)
        self.proj = Linear(2 * hidden, dim, rng)
        self.norm = LayerNorm(dim)

    def forward(self, x):
        h, c1 = self.rnn.forward(x)
        p, c2 = self.proj.forward(h)
        n, c3 = self.norm.forward(p)
        return x + n, (c1, c2, c3)

    def backward(self, dy, cache):
        c1, c2, c3 = cache
        return dy + self.rnn.backward(self.proj.backward(self.norm.backward(dy, c3), c2), c1)


class DualPathBlock(Module):
    """Intra-chunk then inter-chunk path; TAC across channels if enabled.

    Operates on (B, N, n_chunks, chunk, K).
    """

    def __init__(self, dim, hidden, rng, use_tac=False, tac_hidden=None):
        super().__init__()
        self.intra = PathRNN(dim, hidden, rng)
        self.inter = PathRNN(dim, hidden, rng)
        self.tac = TAC(dim, rng, tac_hidden) if use_tac else None

    def forward(self, x):
        a, c1 = self.intra.forward(x)
        b, c2 = self.inter.forward(np.swapaxes(a, -2, -3))
        b = np.swapaxes(b, -2, -3)
        if self.tac is None:
            return b, (c1, c2, None)
        shape = b.shape
        flat = b.reshape(shape[:2] + (-1, shape[-1]))
        out, c3 = self.tac.forward(flat)
        return out.reshape(shape), (c1, c2, c3)

    def backward(self, dy, cache):
        c1, c2, c3 = cache
        if c3 is not None:
            shape = dy.shape
            dy = self.tac.backward(dy.reshape(shape[:2] + (-1, shape[-1])), c3).reshape(shape)
        db = self.inter.backward(np.swapaxes(dy, -2, -3), c2)
        return self.intra.backward(np.swapaxes(db, -2, -3), c1)


class Separator(Module):
    """Per-frame filter estimator: (B, N, T, F) -> (B, N, T, out_dim) in (-1, 1).

    With ``use_tac`` the blocks exchange information across the N channels;
    without it every channel is processed independently.
    """

    def __init__(self, in_dim, dim, hidden, out_dim, rng, depth=2, chunk=50,
                 use_tac=False, tac_hidden=None):
        super().__init__()
        if chunk < 2 or chunk % 2:
            raise ValueError("chunk size must be an even number >= 2")
        self.chunk = chunk
        self.use_tac = use_tac
        self.norm = LayerNorm(in_dim)
        self.bottleneck = Linear(in_dim, dim, rng)
        self.blocks = []
        for k in range(depth):
            blk = DualPathBlock(dim, hidden, rng, use_tac, tac_hidden)
            self.add_module(f"block{k}", blk)
            self.blocks.append(blk)
        self.out_act = PReLU()
        self.head = Linear(dim, out_dim, rng)
        self.squash = Tanh()

    def forward(self, feats):
        if feats.ndim != 4:
            raise ValueError("separator expects (B, N, T, F) features")
        T = feats.shape[2]
        z, c_norm = self.norm.forward(feats)
        z, c_bn = self.bottleneck.forward(z)
        x = segment(z, self.chunk)
        c_blocks = []
        for blk in self.blocks:
            x, c = blk.forward(x)
            c_blocks.append(c)
        m = merge(x, T)
        a, c_act = self.out_act.forward(m)
        o, c_head = self.head.forward(a)
        y, c_sq = self.squash.forward(o)
        if not np.all(np.isfinite(y)):
            raise NumericalError("non-finite activations in filter estimation")
        return y, (T, c_norm, c_bn, c_blocks, c_act, c_head, c_sq)

    def backward(self, dy, cache):
        T, c_norm, c_bn, c_blocks, c_act, c_head, c_sq = cache
        d = self.out_act.backward(self.head.backward(self.squash.backward(dy, c_sq), c_head), c_act)
        dx = segment(d, self.chunk)
        for blk, c in zip(reversed(self.blocks), reversed(c_blocks)):
            dx = blk.backward(dx, c)
        dz = merge(dx, T)
        return self.norm.backward(self.bottleneck.backward(dz, c_bn), c_norm)


def estimate_filters(features, separator, num_sources, filter_len):
    """Run ``separator`` and reshape its output to (B, N, T, C, 2W + 1) filters."""
    y, _ = separator.forward(features)
    return y.reshape(y.shape[:3] + (num_sources, filter_len))
