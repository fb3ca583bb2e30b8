"""Filter-and-sum network: NCC + encoder features, filter estimation, synthesis.

Four variants:

``two_stage``         reference-channel pre-separation, then pair-wise
                      filters for the remaining channels
``two_stage_tac``     as above with TAC in every second-stage block
``single_stage``      filters for all channels estimated at once, channels
                      processed independently
``single_stage_tac``  single stage with TAC in every block

Channel 0 of the input is the reference microphone.
"""
from dataclasses import asdict, dataclass, fields

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from tacbeam.dprnn import Separator
from tacbeam.features import Encoder, ncc, ncc_center_grad, ncc_mean
from tacbeam.framing import FrameSpec, center, context_frames, overlap_add, overlap_add_backward
from tacbeam.nn import Module

VARIANTS = ("two_stage", "two_stage_tac", "single_stage", "single_stage_tac")


@dataclass
class FasnetConfig:
    variant: str = "single_stage_tac"
    num_sources: int = 2
    sample_rate: int = 16000
    frame_len: int = 256
    context: int = 256
    hop: int = 0  # 0 means frame_len // 2
    enc_dim: int = 64
    tac_dim: int = 0  # 0 means 3 * enc_dim
    hidden: int = 128
    depth: int = 2
    chunk: int = 50
    max_mics: int = 6

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.num_sources < 1:
            raise ValueError("num_sources must be >= 1")
        if self.enc_dim < 1 or self.hidden < 1 or self.depth < 1:
            raise ValueError("enc_dim, hidden and depth must be positive")
        if self.max_mics < 1:
            raise ValueError("max_mics must be >= 1")
        self.frame_spec  # validates L, H, W

    @property
    def frame_spec(self):
        hop = self.hop or max(self.frame_len // 2, 1)
        return FrameSpec(self.frame_len, hop, self.context, self.sample_rate)

    @property
    def filter_len(self):
        return 2 * self.context + 1

    @property
    def two_stage(self):
        return self.variant.startswith("two_stage")

    @property
    def uses_tac(self):
        return self.variant.endswith("_tac")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown model config keys: {sorted(unknown)}")
        return cls(**d)


def _windows(c, L):
    return sliding_window_view(c, L, axis=-1)  # (..., 2W+1, L)


def stage1_features(contexts, encoder, spec, ref=0):
    """Reference embedding concatenated with the channel-mean NCC.

    contexts: (B, N, T, L + 2W). Returns (B, T, K + 2W + 1) and the encoder cache.
    """
    N = contexts.shape[1]
    if not 0 <= ref < N:
        raise IndexError(f"reference channel {ref} out of range for {N} channels")
    c_ref = contexts[:, ref]
    q = ncc(center(c_ref, spec)[:, None], contexts)
    q_mean = ncc_mean([q[:, i] for i in range(N)])
    R, enc_cache = encoder.forward(c_ref)
    return np.concatenate([R, q_mean], axis=-1), enc_cache


def single_stage_features(contexts, encoder, spec, ref=0):
    """Per-channel [R_i ; q_i] with q_i the NCC of the reference center vs channel i.

    Returns (B, N, T, K + 2W + 1) and the encoder cache.
    """
    q = ncc(center(contexts[:, ref], spec)[:, None], contexts)
    R, enc_cache = encoder.forward(contexts)
    return np.concatenate([R, q], axis=-1), enc_cache


def filter_and_sum(contexts, filters):
    """y[b, j, t] = sum_i apply_filter(c[b, i, t], h[b, i, t, j]).

    contexts (B, N, T, L + 2W), filters (B, N, T, C, 2W + 1) -> (B, C, T, L).
    """
    F = filters.shape[-1]
    L = contexts.shape[-1] - F + 1
    if L < 1 or contexts.shape[:3] != filters.shape[:3]:
        raise ValueError(
            f"filters {filters.shape} do not match contexts {contexts.shape}"
        )
    return np.einsum("bntkl,bntck->bctl", _windows(contexts, L), filters)


def filter_and_sum_grad(contexts, dframes):
    """Gradient of :func:`filter_and_sum` w.r.t. the filters."""
    L = dframes.shape[-1]
    return np.einsum("bntkl,bctl->bntck", _windows(contexts, L), dframes)


class FaSNet(Module):
    def __init__(self, config, rng):
        super().__init__()
        self.config = config
        spec = config.frame_spec
        K = config.enc_dim
        F = config.filter_len
        C = config.num_sources
        common = dict(depth=config.depth, chunk=config.chunk, tac_hidden=config.tac_dim or None)
        if config.two_stage:
            self.enc1 = Encoder(spec.context_len, K, rng)
            self.sep1 = Separator(K + F, K, config.hidden, C * F, rng, use_tac=False, **common)
            self.enc2 = Encoder(spec.context_len, K, rng)
            self.sep2 = Separator(K + F, K, config.hidden, F, rng, use_tac=config.uses_tac, **common)
        else:
            self.enc = Encoder(spec.context_len, K, rng)
            self.sep = Separator(K + F, K, config.hidden, C * F, rng, use_tac=config.uses_tac, **common)

    @property
    def spec(self):
        return self.config.frame_spec

    def forward(self, x):
        """x: (B, N, S) or (N, S) waveforms -> (B, C, S) or (C, S) estimates."""
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 2
        if squeeze:
            x = x[None]
        if x.ndim != 3:
            raise ValueError("expected (B, N, S) or (N, S) input")
        if self.config.two_stage and x.shape[1] < 2:
            raise ValueError("two-stage variants need at least 2 channels")
        S = x.shape[-1]
        c = context_frames(x, self.spec)
        if self.config.two_stage:
            frames, inner = self._two_stage(c)
        else:
            frames, inner = self._single_stage(c)
        y = overlap_add(frames, self.spec, length=S)
        cache = (squeeze, c, frames.shape[2], inner)
        return (y[0] if squeeze else y), cache

    def backward(self, dy, cache):
        """Accumulate parameter gradients; inputs are data, so returns None."""
        squeeze, c, T, inner = cache
        if squeeze:
            dy = dy[None]
        dframes = overlap_add_backward(dy, T, self.spec)
        if self.config.two_stage:
            self._two_stage_backward(c, dframes, inner)
        else:
            self._single_stage_backward(c, dframes, inner)
        return None

    def separate(self, x):
        return self.forward(x)[0]

    def _single_stage(self, c):
        cfg = self.config
        B, N, T, _ = c.shape
        feats, enc_cache = single_stage_features(c, self.enc, self.spec)
        h, sep_cache = self.sep.forward(feats)
        h = h.reshape(B, N, T, cfg.num_sources, cfg.filter_len)
        return filter_and_sum(c, h), (enc_cache, sep_cache)

    def _single_stage_backward(self, c, dframes, inner):
        enc_cache, sep_cache = inner
        B, N, T, _ = c.shape
        dh = filter_and_sum_grad(c, dframes).reshape(B, N, T, -1)
        dfeats = self.sep.backward(dh, sep_cache)
        self.enc.backward(dfeats[..., : self.config.enc_dim], enc_cache)

    def _two_stage(self, c):
        cfg = self.config
        spec = self.spec
        B, N, T, _ = c.shape
        C, F, L = cfg.num_sources, cfg.filter_len, spec.frame_len
        feats1, e1 = stage1_features(c, self.enc1, spec)
        h1, s1 = self.sep1.forward(feats1[:, None])
        h1 = h1.reshape(B, 1, T, C, F)
        y1 = filter_and_sum(c[:, :1], h1)  # (B, C, T, L) pre-separation
        rest = c[:, 1:]
        M = N - 1
        v = ncc(y1[:, :, None], rest[:, None])  # (B, C, M, T, F)
        R2, e2 = self.enc2.forward(rest)
        feats2 = np.concatenate(
            [np.broadcast_to(R2[:, None], (B, C, M, T, cfg.enc_dim)), v], axis=-1
        ).reshape(B * C, M, T, -1)
        h2, s2 = self.sep2.forward(feats2)
        h2 = h2.reshape(B, C, M, T, F)
        y = y1 + np.einsum("bmtkl,bcmtk->bctl", _windows(rest, L), h2)
        return y, (e1, s1, y1, e2, s2)

    def _two_stage_backward(self, c, dframes, inner):
        e1, s1, y1, e2, s2 = inner
        cfg = self.config
        B, N, T, _ = c.shape
        C, K, L = cfg.num_sources, cfg.enc_dim, self.spec.frame_len
        M = N - 1
        rest = c[:, 1:]
        dh2 = np.einsum("bmtkl,bctl->bcmtk", _windows(rest, L), dframes)
        df2 = self.sep2.backward(dh2.reshape(B * C, M, T, -1), s2).reshape(B, C, M, T, -1)
        self.enc2.backward(df2[..., :K].sum(axis=1), e2)
        dy1 = dframes + ncc_center_grad(y1[:, :, None], rest[:, None], df2[..., K:]).sum(axis=2)
        dh1 = filter_and_sum_grad(c[:, :1], dy1).reshape(B, 1, T, -1)
        df1 = self.sep1.backward(dh1, s1)
        self.enc1.backward(df1[:, 0, :, :K], e1)


def build_model(config, seed=0):
    return FaSNet(config, np.random.default_rng(seed))
