"""Synthetic dry sources standing in for read speech and non-speech noise.

Speech-like signals are harmonic complexes with a drifting pitch, a
formant-shaped spectral envelope per syllable, light aspiration noise and a
syllabic on/off envelope. Noise is low-order filtered white noise with a
slow amplitude modulation. Both are returned at unit RMS.
"""
import numpy as np
from scipy.signal import butter, lfilter


def _unit_rms(x):
    rms = np.sqrt(np.mean(x * x))
    return x / rms if rms > 0 else x


def _syllables(rng, n, fs):
    """List of (start, stop) sample ranges with silent gaps between them."""
    spans = []
    pos = int(rng.uniform(0.0, 0.05) * fs)
    while pos < n:
        dur = int(rng.uniform(0.08, 0.30) * fs)
        spans.append((pos, min(pos + dur, n)))
        pos += dur + int(rng.uniform(0.02, 0.12) * fs)
    return spans or [(0, n)]


def _formant_gain(freqs, formants, bandwidths):
    g = np.zeros_like(freqs)
    for fc, bw in zip(formants, bandwidths):
        g += 1.0 / (1.0 + ((freqs - fc) / bw) ** 2)
    return g


def synth_speech(rng, n, fs):
    """A speech-like dry signal of ``n`` samples at ``fs`` Hz."""
    t = np.arange(n) / fs
    f0 = rng.uniform(90.0, 250.0)
    vib_rate = rng.uniform(0.5, 3.0)
    contour = f0 * (1.0 + 0.08 * np.sin(2 * np.pi * vib_rate * t + rng.uniform(0, 2 * np.pi)))
    phase = 2 * np.pi * np.cumsum(contour) / fs
    nyq = fs / 2.0
    n_harm = max(int(0.9 * nyq / (1.08 * f0)), 1)
    k = np.arange(1, n_harm + 1)
    harm_phase = rng.uniform(0, 2 * np.pi, n_harm)
    b, a = butter(2, [min(1500.0, 0.4 * nyq) / nyq, 0.95], btype="band")
    aspiration = lfilter(b, a, rng.standard_normal(n))
    out = np.zeros(n)
    for start, stop in _syllables(rng, n, fs):
        formants = [rng.uniform(300, 900), rng.uniform(900, 2300), rng.uniform(2300, 3400)]
        formants = [min(f, 0.85 * nyq) for f in formants]
        amps = _formant_gain(k * f0, formants, [80.0, 120.0, 180.0]) / k
        seg = np.sin(np.outer(phase[start:stop], k) + harm_phase) @ amps
        m = stop - start
        env = np.sin(np.pi * (np.arange(m) + 0.5) / m) ** 2
        voiced = _unit_rms(seg) if m > 1 else seg
        out[start:stop] = env * (voiced + 0.1 * aspiration[start:stop])
    return _unit_rms(out)


def synth_noise(rng, n, fs):
    """Colored, slowly modulated noise of ``n`` samples."""
    nyq = fs / 2.0
    lo = rng.uniform(50.0, 0.3 * nyq)
    hi = rng.uniform(lo + 0.1 * nyq, 0.98 * nyq)
    b, a = butter(2, [lo / nyq, hi / nyq], btype="band")
    x = lfilter(b, a, rng.standard_normal(n))
    t = np.arange(n) / fs
    mod = 1.0 + 0.5 * np.sin(2 * np.pi * rng.uniform(0.1, 2.0) * t + rng.uniform(0, 2 * np.pi))
    return _unit_rms(x * mod)


def pick_from_pool(rng, pool, n):
    """Take a random excerpt of ``n`` samples from a list of signals (looping short ones)."""
    x = pool[int(rng.integers(len(pool)))]
    if x.size >= n:
        start = int(rng.integers(x.size - n + 1))
        return _unit_rms(x[start : start + n].astype(np.float64))
    return _unit_rms(np.resize(x.astype(np.float64), n))
