"""Cross-channel NCC features and the linear context-frame encoder."""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from tacbeam.nn.core import Module

NORM_FLOOR = 1e-8


def _windows(center, context):
    L = center.shape[-1]
    if context.shape[-1] < L or (context.shape[-1] - L) % 2:
        raise ValueError(
            f"context length {context.shape[-1]} inconsistent with center length {L}"
        )
    return sliding_window_view(context, L, axis=-1)  # (..., 2W+1, L)


def ncc(center, context):
    """Cosine similarity between ``center`` (L) and every L-window of ``context``.

    Returns 2W + 1 values per frame. Entries where either norm is below
    1e-8 are 0. Leading axes broadcast.
    """
    center = np.asarray(center, dtype=np.float64)
    context = np.asarray(context, dtype=np.float64)
    win = _windows(center, context)
    dots = np.einsum("...kn,...n->...k", win, center)
    cn = np.linalg.norm(center, axis=-1)[..., None]
    wn = np.linalg.norm(win, axis=-1)
    ok = (cn > NORM_FLOOR) & (wn > NORM_FLOOR)
    denom = np.where(ok, cn * wn, 1.0)
    return np.clip(np.where(ok, dots / denom, 0.0), -1.0, 1.0)


def ncc_center_grad(center, context, dq):
    """Gradient of ``sum(dq * ncc(center, context))`` w.r.t. ``center``.

    Only the center side is differentiated; the context is always raw
    microphone data.
    """
    win = _windows(center, context)
    dots = np.einsum("...kn,...n->...k", win, center)
    cn = np.linalg.norm(center, axis=-1)[..., None]
    wn = np.linalg.norm(win, axis=-1)
    ok = (cn > NORM_FLOOR) & (wn > NORM_FLOOR)
    a = np.where(ok, dq / np.where(ok, cn * wn, 1.0), 0.0)
    b = np.where(ok, dq * dots / np.where(ok, cn**3 * wn, 1.0), 0.0)
    # d/dc <c,w>/(|c||w|) = w/(|c||w|) - <c,w> c/(|c|^3 |w|)
    return np.einsum("...k,...kn->...n", a, win) - b.sum(-1)[..., None] * center


def _tree_sum(items):
    while len(items) > 1:
        nxt = [items[i] + items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def ncc_mean(vectors):
    """Entrywise mean of NCC vectors via pairwise (tree) summation."""
    vectors = [np.asarray(v, dtype=np.float64) for v in vectors]
    if not vectors:
        raise ValueError("ncc_mean needs at least one vector")
    return _tree_sum(vectors) / len(vectors)


class Encoder(Module):
    """Bias-free linear map from a context frame (L + 2W) to K features."""

    def __init__(self, context_len, dim, rng):
        super().__init__()
        bound = 1.0 / np.sqrt(context_len)
        self.U = self.param(rng.uniform(-bound, bound, (context_len, dim)))

    @property
    def dim(self):
        return self.U.values.shape[1]

    def forward(self, c):
        if c.shape[-1] != self.U.values.shape[0]:
            raise ValueError(
                f"context length {c.shape[-1]} does not match encoder input "
                f"{self.U.values.shape[0]}"
            )
        return c @ self.U.values, c

    def backward(self, dr, cache):
        c = cache
        self.U.grads += c.reshape(-1, c.shape[-1]).T @ dr.reshape(-1, dr.shape[-1])
        return dr @ self.U.values.T


def encode(c, U):
    """``R = c U`` for a raw weight matrix."""
    c = np.asarray(c, dtype=np.float64)
    U = np.asarray(U, dtype=np.float64)
    if c.shape[-1] != U.shape[0]:
        raise ValueError(f"shape mismatch: {c.shape} @ {U.shape}")
    return c @ U
