"""Image-method room impulse responses for a shoebox room.

All six walls share one reflection coefficient derived from T60 by
inverting Sabine's formula. Taps sit at the nearest sample of the image
delay (no fractional-delay interpolation).
"""
import math

import numpy as np

from tacbeam import kernels

SPEED_OF_SOUND = 343.0


def sabine_beta(dims, t60):
    """Wall reflection coefficient giving reverberation time ``t60`` (Sabine).

    alpha = 0.161 V / (S T60), beta = sqrt(1 - alpha); alpha is clipped to 1.
    ``t60 == 0`` gives an anechoic room (beta = 0).
    """
    if t60 < 0:
        raise ValueError("t60 must be non-negative")
    if t60 == 0:
        return 0.0
    lx, ly, lz = dims
    volume = lx * ly * lz
    surface = 2.0 * (lx * ly + lx * lz + ly * lz)
    alpha = min(0.161 * volume / (surface * t60), 1.0)
    return math.sqrt(1.0 - alpha)


def _inside(p, dims):
    return all(0.0 < p[k] < dims[k] for k in range(3))


def rir_image_method(dims, src, mic, fs, n_taps, beta=None, t60=None, c=SPEED_OF_SOUND,
                     max_order=-1):
    """Impulse response from ``src`` to ``mic`` of length ``n_taps``.

    Give either ``beta`` directly or ``t60`` (converted with
    :func:`sabine_beta`). ``max_order`` limits the total number of wall
    reflections (-1: all images that arrive within ``n_taps``).
    """
    dims = np.asarray(dims, dtype=np.float64)
    src = np.asarray(src, dtype=np.float64)
    mic = np.asarray(mic, dtype=np.float64)
    if not (_inside(src, dims) and _inside(mic, dims)):
        raise ValueError("source and microphone must lie strictly inside the room")
    if np.allclose(src, mic):
        raise ValueError("source and microphone coincide")
    if (beta is None) == (t60 is None):
        raise ValueError("give exactly one of beta or t60")
    if beta is None:
        beta = sabine_beta(dims, t60)
    return kernels.image_source_rir(dims, src, mic, float(beta), float(fs), int(n_taps),
                                    float(c), int(max_order))


def rir_length(dims, t60, fs, c=SPEED_OF_SOUND):
    """Taps needed to cover the direct path plus a 60 dB decay."""
    diag = float(np.linalg.norm(dims))
    return int(math.ceil((t60 + diag / c) * fs)) + 1


def schroeder_t60(rir, fs, start_db=-5.0, stop_db=-25.0):
    """T60 from a linear fit to the Schroeder backward-integrated decay.

    The fit spans ``start_db`` to ``stop_db`` and is extrapolated to 60 dB.
    """
    energy = np.cumsum(np.asarray(rir, dtype=np.float64)[::-1] ** 2)[::-1]
    if energy[0] <= 0:
        raise ValueError("impulse response has no energy")
    edc = 10.0 * np.log10(np.maximum(energy / energy[0], 1e-300))
    idx = np.nonzero((edc <= start_db) & (edc >= stop_db))[0]
    if idx.size < 2:
        raise ValueError("decay range too short for a fit")
    t = idx / fs
    slope, _ = np.polyfit(t, edc[idx], 1)
    return -60.0 / slope
