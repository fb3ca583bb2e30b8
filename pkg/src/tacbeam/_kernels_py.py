"""Pure numpy implementations of the hot loops.

Same signatures and semantics as the compiled ``tacbeam._kernels``; used
when the extension is unavailable or ``TACBEAM_PURE_PYTHON=1`` is set.
"""
import math

import numpy as np


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def lstm_forward(xg, wh):
    """Run the LSTM recurrence over precomputed input projections.

    xg : (T, B, 4H) input projections including bias, gate order i, f, g, o.
    wh : (H, 4H) recurrent weights.

    Returns ``h`` (T, B, H), ``c`` (T, B, H) and the activated gates
    ``acts`` (T, B, 4H). Initial states are zero.
    """
    T, B, G = xg.shape
    H = G // 4
    h = np.empty((T, B, H))
    c = np.empty((T, B, H))
    acts = np.empty((T, B, G))
    h_prev = np.zeros((B, H))
    c_prev = np.zeros((B, H))
    for t in range(T):
        z = xg[t] + h_prev @ wh
        a = acts[t]
        a[:, : 2 * H] = _sigmoid(z[:, : 2 * H])
        a[:, 2 * H : 3 * H] = np.tanh(z[:, 2 * H : 3 * H])
        a[:, 3 * H :] = _sigmoid(z[:, 3 * H :])
        c[t] = a[:, H : 2 * H] * c_prev + a[:, :H] * a[:, 2 * H : 3 * H]
        h[t] = a[:, 3 * H :] * np.tanh(c[t])
        h_prev = h[t]
        c_prev = c[t]
    return h, c, acts


def lstm_backward(dh, c, acts, wh):
    """Backpropagate through the recurrence; returns d(xg) of shape (T, B, 4H).

    The recurrent weight gradient is ``sum_t h[t-1].T @ dxg[t]`` and is
    formed by the caller in one matrix product.
    """
    T, B, H = dh.shape
    dxg = np.empty((T, B, 4 * H))
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        a = acts[t]
        i = a[:, :H]
        f = a[:, H : 2 * H]
        g = a[:, 2 * H : 3 * H]
        o = a[:, 3 * H :]
        tc = np.tanh(c[t])
        dht = dh[t] + dh_next
        dc = dc_next + dht * o * (1.0 - tc * tc)
        c_prev = c[t - 1] if t > 0 else np.zeros((B, H))
        d = dxg[t]
        d[:, :H] = dc * g * i * (1.0 - i)
        d[:, H : 2 * H] = dc * c_prev * f * (1.0 - f)
        d[:, 2 * H : 3 * H] = dc * i * (1.0 - g * g)
        d[:, 3 * H :] = dht * tc * o * (1.0 - o)
        dc_next = dc * f
        dh_next = d @ wh.T
    return dxg


def _axis_images(src, mic, size, m_max):
    """Per-axis image offsets (image - mic) and reflection counts.

    Ordered by m ascending, then p in (0, 1); the compiled kernel walks
    the same order so both accumulate taps identically.
    """
    offs = []
    refl = []
    for m in range(-m_max, m_max + 1):
        for p in (0, 1):
            offs.append((1 - 2 * p) * src + 2 * m * size - mic)
            refl.append(abs(m - p) + abs(m))
    return np.array(offs), np.array(refl)


def image_source_rir(room, src, mic, beta, fs, n_taps, c=343.0, max_order=-1):
    """Accumulate image-source taps into an impulse response of ``n_taps``.

    Tap index is ``floor(d / c * fs + 0.5)``; amplitude ``beta**n / (4 pi d)``
    with ``n`` the total number of wall reflections of the image.
    """
    rir = np.zeros(n_taps)
    reach = n_taps * c / fs
    ox, nx = _axis_images(src[0], mic[0], room[0], int(math.ceil(reach / (2 * room[0]))) + 1)
    oy, ny = _axis_images(src[1], mic[1], room[1], int(math.ceil(reach / (2 * room[1]))) + 1)
    oz, nz = _axis_images(src[2], mic[2], room[2], int(math.ceil(reach / (2 * room[2]))) + 1)
    dist = np.sqrt(
        ox[:, None, None] ** 2 + oy[None, :, None] ** 2 + oz[None, None, :] ** 2
    ).ravel()
    order = (nx[:, None, None] + ny[None, :, None] + nz[None, None, :]).ravel()
    taps = np.floor(dist / c * fs + 0.5).astype(np.int64)
    keep = taps < n_taps
    if max_order >= 0:
        keep &= order <= max_order
    amp = np.power(float(beta), order[keep].astype(float)) / (4.0 * math.pi * dist[keep])
    np.add.at(rir, taps[keep], amp)
    return rir
