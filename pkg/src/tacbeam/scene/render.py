"""Mixture synthesis from a sampled scene and dry sources."""
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from tacbeam.scene.rir import rir_image_method, rir_length


@dataclass
class RenderedScene:
    mixture: np.ndarray  # (N, S)
    targets: np.ndarray  # (2, N, S) reverberant speech images
    noise: np.ndarray  # (N, S) reverberant noise image
    dry: np.ndarray  # (3, S) placed and scaled dry speech 1, speech 2, noise
    spec: object
    sample_rate: int


def _power(x):
    return float(np.mean(x * x))


def speaker_span(n_samples, overlap_ratio):
    """Active length of each speaker so that overlap / total = ``overlap_ratio``.

    Speaker 1 occupies [0, l), speaker 2 occupies [S - l, S).
    """
    return int(min(max(round(n_samples * (1.0 + overlap_ratio) / 2.0), 1), n_samples))


def place_sources(spec, speech1, speech2, noise, n_samples):
    """Shift, rescale and loop the dry signals; returns a (3, S) array."""
    l = speaker_span(n_samples, spec.overlap_ratio)
    out = np.zeros((3, n_samples))
    for k, x in enumerate((speech1, speech2)):
        x = np.asarray(x, dtype=np.float64)[:l]
        if _power(x) == 0.0:
            raise ValueError("speech source has zero power")
        x = x / np.sqrt(_power(x))
        if k == 0:
            out[0, : x.size] = x
        else:
            out[1, n_samples - l : n_samples - l + x.size] = x
    out[1] *= np.sqrt(10.0 ** (-spec.speech_snr / 10.0))
    noise = np.resize(np.asarray(noise, dtype=np.float64), n_samples)
    if _power(noise) == 0.0:
        raise ValueError("noise source has zero power")
    speech_power = _power(out[0] + out[1])
    out[2] = noise * np.sqrt(speech_power / (_power(noise) * 10.0 ** (spec.noise_snr / 10.0)))
    return out


def render_scene(spec, speech1, speech2, noise, fs, n_samples):
    """Convolve every dry source with every microphone's RIR and sum per channel."""
    dry = place_sources(spec, speech1, speech2, noise, n_samples)
    dims = spec.room.dims
    n_taps = rir_length(dims, spec.room.t60, fs)
    positions = list(spec.source_positions) + [spec.noise_position]
    images = np.zeros((3, spec.n_mics, n_samples))
    for i, mic in enumerate(spec.mic_positions):
        for k, pos in enumerate(positions):
            h = rir_image_method(dims, pos, mic, fs, n_taps, t60=spec.room.t60)
            images[k, i] = fftconvolve(dry[k], h)[:n_samples]
    mixture = images[0] + images[1] + images[2]
    return RenderedScene(mixture, images[:2].copy(), images[2].copy(), dry, spec, fs)
