"""Time-domain framing, context windows, per-frame filtering and overlap-add.

All functions work on the last axis and broadcast over any leading axes,
so a (batch, channels, samples) array frames to (batch, channels, T, L).
"""
from dataclasses import dataclass
import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


@dataclass(frozen=True)
class FrameSpec:
    """Framing parameters, all in samples.

    ``frame_len`` is the center frame length L, ``hop`` the hop size H and
    ``context`` the number W of extra samples on each side of a frame.
    """

    frame_len: int
    hop: int
    context: int
    sample_rate: int = 16000

    def __post_init__(self):
        if self.frame_len < 1:
            raise ValueError(f"frame_len must be >= 1, got {self.frame_len}")
        if self.context < 0:
            raise ValueError(f"context must be >= 0, got {self.context}")
        if not 1 <= self.hop <= self.frame_len:
            raise ValueError(f"hop must lie in [1, frame_len], got {self.hop}")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")

    @classmethod
    def from_ms(cls, frame_ms, context_ms, sample_rate, hop=None):
        L = int(round(frame_ms * sample_rate / 1000))
        W = int(round(context_ms * sample_rate / 1000))
        return cls(L, hop if hop is not None else max(L // 2, 1), W, sample_rate)

    @property
    def context_len(self):
        return self.frame_len + 2 * self.context

    @property
    def filter_len(self):
        return 2 * self.context + 1

    def num_frames(self, n_samples):
        return int(math.ceil(n_samples / self.hop))

    def padded_len(self, n_samples):
        return (self.num_frames(n_samples) - 1) * self.hop + self.frame_len


def _check_signal(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0 or x.shape[-1] == 0:
        raise ValueError("signal is empty")
    return x


def _strided_frames(padded, length, hop, n_frames):
    win = sliding_window_view(padded, length, axis=-1)
    return np.ascontiguousarray(win[..., : (n_frames - 1) * hop + 1 : hop, :])


def frame_signal(x, spec):
    """Split ``x`` into ``ceil(len/H)`` frames of L samples; the tail is zero-padded."""
    x = _check_signal(x)
    S = x.shape[-1]
    T = spec.num_frames(S)
    pad = [(0, 0)] * (x.ndim - 1) + [(0, spec.padded_len(S) - S)]
    return _strided_frames(np.pad(x, pad), spec.frame_len, spec.hop, T)


def context_frames(x, spec):
    """Frames of L + 2W samples; frame t spans samples [tH - W, tH + L + W - 1].

    Out-of-range samples are zero.
    """
    x = _check_signal(x)
    S = x.shape[-1]
    T = spec.num_frames(S)
    W = spec.context
    pad = [(0, 0)] * (x.ndim - 1) + [(W, spec.padded_len(S) - S + W)]
    return _strided_frames(np.pad(x, pad), spec.context_len, spec.hop, T)


def center(contexts, spec):
    """The center L samples of each context frame."""
    W = spec.context
    return contexts[..., W : W + spec.frame_len]


def apply_filter(c, h):
    """Sliding product ``out[n] = sum_k h[k] * c[n + k]`` (no kernel flip).

    ``c`` has length L + 2W, ``h`` length 2W + 1, output length L. Leading
    axes broadcast.
    """
    c = np.asarray(c, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    K = h.shape[-1]
    L = c.shape[-1] - K + 1
    if K % 2 != 1 or L < 1:
        raise ValueError(
            f"filter length {K} does not fit context length {c.shape[-1]}"
        )
    win = sliding_window_view(c, L, axis=-1)  # (..., K, L)
    return np.einsum("...kn,...k->...n", win, h)


def filter_grad(c, dout):
    """Gradient of ``apply_filter(c, h)`` w.r.t. ``h``: ``dh[k] = sum_n dout[n] c[n+k]``."""
    L = dout.shape[-1]
    win = sliding_window_view(c, L, axis=-1)
    return np.einsum("...kn,...n->...k", win, dout)


def _block_add(frames, hop):
    """Sum frames into hop-sized blocks: frame t, block k lands in block t + k."""
    T, L = frames.shape[-2:]
    r = -(-L // hop)
    lead = frames.shape[:-2]
    if r * hop != L:
        frames = np.concatenate(
            [frames, np.zeros(lead + (T, r * hop - L))], axis=-1
        )
    parts = frames.reshape(lead + (T, r, hop))
    out = np.zeros(lead + (T + r - 1, hop))
    for k in range(r):
        out[..., k : k + T, :] += parts[..., k, :]
    return out.reshape(lead + ((T + r - 1) * hop,))


def coverage(n_frames, spec):
    """How many frames touch each sample of the padded signal."""
    total = (n_frames - 1) * spec.hop + spec.frame_len
    return _block_add(np.ones((n_frames, spec.frame_len)), spec.hop)[:total]


def overlap_add(frames, spec, length=None):
    """Coverage-normalized overlap-add of (..., T, L) frames at hop H.

    The result is truncated to ``length`` samples when given.
    """
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim < 2 or frames.shape[-2] == 0:
        raise ValueError("no frames to overlap-add")
    if frames.shape[-1] != spec.frame_len:
        raise ValueError(
            f"frame length {frames.shape[-1]} does not match spec L={spec.frame_len}"
        )
    T = frames.shape[-2]
    total = (T - 1) * spec.hop + spec.frame_len
    y = _block_add(frames, spec.hop)[..., :total] / coverage(T, spec)
    if length is not None:
        y = y[..., :length]
    return y


def overlap_add_backward(dy, n_frames, spec):
    """Adjoint of :func:`overlap_add`: maps d(waveform) to d(frames)."""
    total = (n_frames - 1) * spec.hop + spec.frame_len
    pad = [(0, 0)] * (dy.ndim - 1) + [(0, total - dy.shape[-1])]
    scaled = np.pad(dy, pad) / coverage(n_frames, spec)
    return _strided_frames(scaled, spec.frame_len, spec.hop, n_frames)
