import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tacbeam.framing import (
    FrameSpec,
    apply_filter,
    center,
    context_frames,
    filter_grad,
    frame_signal,
    overlap_add,
    overlap_add_backward,
)

from oracles import context_by_index, coverage_ola, filter_loop, frames_by_index


def test_frame_spec_validation():
    with pytest.raises(ValueError):
        FrameSpec(4, 0, 2)
    with pytest.raises(ValueError):
        FrameSpec(4, 5, 2)
    with pytest.raises(ValueError):
        FrameSpec(0, 1, 2)
    with pytest.raises(ValueError):
        FrameSpec(4, 2, -1)
    spec = FrameSpec(4, 2, 3)
    assert spec.context_len == 10
    assert spec.filter_len == 7


def test_from_ms_defaults_to_half_hop():
    spec = FrameSpec.from_ms(16, 16, 16000)
    assert (spec.frame_len, spec.hop, spec.context) == (256, 128, 256)
    spec = FrameSpec.from_ms(4, 16, 16000)
    assert (spec.frame_len, spec.context) == (64, 256)


def test_frame_signal_overlapping():
    x = np.arange(1, 9, dtype=float)
    frames = frame_signal(x, FrameSpec(4, 2, 0))
    np.testing.assert_array_equal(
        frames, [[1, 2, 3, 4], [3, 4, 5, 6], [5, 6, 7, 8], [7, 8, 0, 0]]
    )


def test_frame_signal_partition():
    x = np.arange(1, 9, dtype=float)
    frames = frame_signal(x, FrameSpec(4, 4, 0))
    np.testing.assert_array_equal(frames, [[1, 2, 3, 4], [5, 6, 7, 8]])


def test_frame_signal_rejects_empty():
    with pytest.raises(ValueError):
        frame_signal(np.array([]), FrameSpec(4, 2, 0))


@pytest.mark.parametrize("L,H,W,S", [(4, 2, 2, 11), (8, 3, 5, 40), (5, 5, 0, 17), (6, 1, 3, 9)])
def test_frames_match_index_oracle(rng, L, H, W, S):
    x = rng.standard_normal(S)
    spec = FrameSpec(L, H, W)
    np.testing.assert_array_equal(frame_signal(x, spec), frames_by_index(x, L, H))
    np.testing.assert_array_equal(context_frames(x, spec), context_by_index(x, L, H, W))


def test_context_left_boundary():
    x = np.arange(1, 13, dtype=float)
    c = context_frames(x, FrameSpec(4, 2, 2))
    np.testing.assert_array_equal(c[0], [0, 0, 1, 2, 3, 4, 5, 6])


def test_zero_context_equals_frames(rng):
    x = rng.standard_normal(50)
    spec = FrameSpec(8, 4, 0)
    np.testing.assert_array_equal(context_frames(x, spec), frame_signal(x, spec))


def test_interior_context_is_raw_slice(rng):
    x = rng.standard_normal(1000)
    spec = FrameSpec(32, 16, 24)
    c = context_frames(x, spec)
    t = 20
    np.testing.assert_array_equal(c[t], x[t * 16 - 24 : t * 16 + 32 + 24])
    np.testing.assert_array_equal(center(c, spec), frame_signal(x, spec))


def test_batched_framing(rng):
    x = rng.standard_normal((2, 3, 37))
    spec = FrameSpec(6, 3, 2)
    c = context_frames(x, spec)
    assert c.shape == (2, 3, 13, 10)
    np.testing.assert_array_equal(c[1, 2], context_frames(x[1, 2], spec))


def test_roundtrip_coverage_oracle(rng):
    x = rng.standard_normal(1000)
    spec = FrameSpec(64, 32, 0)
    frames = frame_signal(x, spec)
    oracle = coverage_ola(frames, 32, 1000)
    np.testing.assert_allclose(oracle, x, atol=1e-12)
    np.testing.assert_allclose(overlap_add(frames, spec, 1000), oracle, atol=1e-12)


@pytest.mark.parametrize("div", [1, 2, 4])
def test_roundtrip_hops(rng, div):
    x = rng.standard_normal(777)
    spec = FrameSpec(64, 64 // div, 0)
    np.testing.assert_allclose(overlap_add(frame_signal(x, spec), spec, len(x)), x, atol=1e-12)


def test_overlap_add_single_frame(rng):
    f = rng.standard_normal((1, 8))
    np.testing.assert_array_equal(overlap_add(f, FrameSpec(8, 4, 0)), f[0])


def test_overlap_add_errors():
    with pytest.raises(ValueError):
        overlap_add(np.zeros((0, 4)), FrameSpec(4, 2, 0))
    with pytest.raises(ValueError):
        overlap_add(np.zeros((3, 5)), FrameSpec(4, 2, 0))


def test_overlap_add_non_divisible_hop(rng):
    frames = rng.standard_normal((7, 10))
    spec = FrameSpec(10, 3, 0)
    np.testing.assert_allclose(overlap_add(frames, spec), coverage_ola(frames, 3, 28), atol=1e-13)


def test_overlap_add_backward_is_adjoint(rng):
    spec = FrameSpec(10, 4, 0)
    frames = rng.standard_normal((2, 9, 10))
    S = 41
    dy = rng.standard_normal((2, S))
    lhs = np.sum(overlap_add(frames, spec, S) * dy)
    rhs = np.sum(frames * overlap_add_backward(dy, 9, spec))
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_identity_filter_is_center_crop(rng):
    c = rng.standard_normal(14)
    h = np.zeros(7)
    h[3] = 1.0
    np.testing.assert_array_equal(apply_filter(c, h), c[3:11])


def test_zero_filter(rng):
    assert not np.any(apply_filter(rng.standard_normal(14), np.zeros(7)))


def test_filter_loop_oracle(rng):
    c = rng.standard_normal(8 + 6)
    h = rng.standard_normal(7)
    np.testing.assert_allclose(apply_filter(c, h), filter_loop(c, h), atol=1e-12)


def test_filter_length_mismatch():
    with pytest.raises(ValueError):
        apply_filter(np.zeros(5), np.zeros(7))
    with pytest.raises(ValueError):
        apply_filter(np.zeros(10), np.zeros(4))


def test_filter_grad_matches_definition(rng):
    c = rng.standard_normal((3, 14))
    dout = rng.standard_normal((3, 8))
    dh = filter_grad(c, dout)
    for b in range(3):
        for k in range(7):
            assert dh[b, k] == pytest.approx(np.dot(dout[b], c[b, k : k + 8]), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(L=st.integers(1, 12), W=st.integers(0, 6), seed=st.integers(0, 10**6))
def test_center_delta_any_size(L, W, seed):
    c = np.random.default_rng(seed).standard_normal(L + 2 * W)
    h = np.zeros(2 * W + 1)
    h[W] = 1.0
    np.testing.assert_array_equal(apply_filter(c, h), c[W : W + L])


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10**6), a=st.floats(-3, 3), b=st.floats(-3, 3))
def test_filter_linearity(seed, a, b):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(20)
    h1, h2 = rng.standard_normal((2, 9))
    np.testing.assert_allclose(
        apply_filter(c, a * h1 + b * h2),
        a * apply_filter(c, h1) + b * apply_filter(c, h2),
        atol=1e-12,
    )


@settings(max_examples=30, deadline=None)
@given(S=st.integers(1, 300), L=st.sampled_from([4, 8, 16]), div=st.sampled_from([1, 2, 4]),
       seed=st.integers(0, 10**6))
def test_roundtrip_property(S, L, div, seed):
    x = np.random.default_rng(seed).standard_normal(S)
    spec = FrameSpec(L, max(L // div, 1), 0)
    np.testing.assert_allclose(overlap_add(frame_signal(x, spec), spec, S), x, atol=1e-12)
