# cython: language_level=3
"""Compiled hot loops: LSTM recurrence and image-source accumulation.

Semantics match ``tacbeam._kernels_py`` exactly; results agree to
rounding (libm vs numpy transcendental functions).
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, tanh, sqrt, floor, ceil, pow, M_PI
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()


cdef inline void _sigmoid(double* x, int n) noexcept nogil:
    cdef int k
    for k in range(n):
        x[k] = 1.0 / (1.0 + exp(-x[k]))


cdef inline void _tanh(double* x, int n) noexcept nogil:
    cdef int k
    for k in range(n):
        x[k] = tanh(x[k])


# The gate loops below run over contiguous rows so that the compiler can
# vectorize exp/tanh (see setup.py for the flags).

def lstm_forward(double[:, :, ::1] xg, double[:, ::1] wh):
    cdef int T = xg.shape[0]
    cdef int B = xg.shape[1]
    cdef int G = xg.shape[2]
    cdef int H = G // 4
    if wh.shape[0] != H or wh.shape[1] != G:
        raise ValueError("recurrent weight shape does not match projections")
    h_arr = np.zeros((T, B, H))
    c_arr = np.zeros((T, B, H))
    a_arr = np.array(xg, copy=True)
    # explicit zero initial state so non-finite weights or gates propagate at t=0 too
    zero_arr = np.zeros((B, H))
    cdef double[:, :, ::1] h = h_arr
    cdef double[:, :, ::1] c = c_arr
    cdef double[:, :, ::1] a = a_arr
    cdef double[:, ::1] zero = zero_arr
    cdef int t, b, k
    cdef double one = 1.0
    cdef char nt = b'N'
    cdef double* row
    cdef double* hp
    cdef double* cp
    cdef double* cc
    cdef double* hc
    if T == 0 or B == 0 or H == 0:
        return h_arr, c_arr, a_arr
    with nogil:
        for t in range(T):
            hp = &h[t - 1, 0, 0] if t > 0 else &zero[0, 0]
            # a[t] += h[t-1] @ wh, row-major via column-major dgemm
            dgemm(&nt, &nt, &G, &B, &H, &one, &wh[0, 0], &G, hp, &H, &one, &a[t, 0, 0], &G)
            # one sigmoid over the whole (B, 4H) slab; g uses tanh(x) = 2 sigmoid(2x) - 1
            for b in range(B):
                row = &a[t, b, 2 * H]
                for k in range(H):
                    row[k] = 2.0 * row[k]
            _sigmoid(&a[t, 0, 0], B * G)
            for b in range(B):
                row = &a[t, b, 0]
                cc = &c[t, b, 0]
                hc = &h[t, b, 0]
                cp = &c[t - 1, b, 0] if t > 0 else &zero[b, 0]
                for k in range(H):
                    row[2 * H + k] = 2.0 * row[2 * H + k] - 1.0
                    cc[k] = row[H + k] * cp[k] + row[k] * row[2 * H + k]
                    hc[k] = cc[k]
            _tanh(&h[t, 0, 0], B * H)
            for b in range(B):
                row = &a[t, b, 3 * H]
                hc = &h[t, b, 0]
                for k in range(H):
                    hc[k] = row[k] * hc[k]
    return h_arr, c_arr, a_arr


def lstm_backward(double[:, :, ::1] dh, double[:, :, ::1] c,
                  double[:, :, ::1] acts, double[:, ::1] wh):
    cdef int T = dh.shape[0]
    cdef int B = dh.shape[1]
    cdef int H = dh.shape[2]
    cdef int G = 4 * H
    dxg_arr = np.zeros((T, B, G))
    dhn_arr = np.zeros((B, H))
    dcn_arr = np.zeros((B, H))
    tc_arr = np.empty(H)
    cdef double[:, :, ::1] dxg = dxg_arr
    cdef double[:, ::1] dhn = dhn_arr
    cdef double[:, ::1] dcn = dcn_arr
    cdef double[::1] tcv = tc_arr
    cdef int t, b, k
    cdef double dht, dc
    cdef double one = 1.0
    cdef double zero = 0.0
    cdef char nt = b'N'
    cdef char tr = b'T'
    cdef double* a
    cdef double* d
    cdef double* tc = &tcv[0] if H > 0 else NULL
    if T == 0 or B == 0 or H == 0:
        return dxg_arr
    with nogil:
        for t in range(T - 1, -1, -1):
            for b in range(B):
                a = &acts[t, b, 0]
                d = &dxg[t, b, 0]
                for k in range(H):
                    tc[k] = c[t, b, k]
                _tanh(tc, H)
                for k in range(H):
                    dht = dh[t, b, k] + dhn[b, k]
                    dc = dcn[b, k] + dht * a[3 * H + k] * (1.0 - tc[k] * tc[k])
                    d[k] = dc * a[2 * H + k] * a[k] * (1.0 - a[k])
                    d[2 * H + k] = dc * a[k] * (1.0 - a[2 * H + k] * a[2 * H + k])
                    d[3 * H + k] = dht * tc[k] * a[3 * H + k] * (1.0 - a[3 * H + k])
                    d[H + k] = dc  # scaled by c[t-1] below
                    dcn[b, k] = dc * a[H + k]
                if t > 0:
                    for k in range(H):
                        d[H + k] = d[H + k] * c[t - 1, b, k] * a[H + k] * (1.0 - a[H + k])
                else:
                    for k in range(H):
                        d[H + k] = 0.0
            # dhn = dxg[t] @ wh.T
            dgemm(&tr, &nt, &H, &B, &G, &one, &wh[0, 0], &G,
                  &dxg[t, 0, 0], &G, &zero, &dhn[0, 0], &H)
    return dxg_arr


def image_source_rir(room, src, mic, double beta, double fs, Py_ssize_t n_taps,
                     double c=343.0, int max_order=-1):
    cdef double[::1] rm = np.ascontiguousarray(room, dtype=np.float64)
    cdef double[::1] s = np.ascontiguousarray(src, dtype=np.float64)
    cdef double[::1] m = np.ascontiguousarray(mic, dtype=np.float64)
    rir_arr = np.zeros(n_taps)
    cdef double[::1] rir = rir_arr
    cdef double reach = n_taps * c / fs
    cdef int mx_max = <int>ceil(reach / (2.0 * rm[0])) + 1
    cdef int my_max = <int>ceil(reach / (2.0 * rm[1])) + 1
    cdef int mz_max = <int>ceil(reach / (2.0 * rm[2])) + 1
    cdef int mx, my, mz, px, py, pz, nx, ny, nz, order
    cdef double dx, dy, dz, d
    cdef Py_ssize_t tap
    with nogil:
        for mx in range(-mx_max, mx_max + 1):
            for px in range(2):
                dx = (1 - 2 * px) * s[0] + 2 * mx * rm[0] - m[0]
                nx = abs(mx - px) + abs(mx)
                for my in range(-my_max, my_max + 1):
                    for py in range(2):
                        dy = (1 - 2 * py) * s[1] + 2 * my * rm[1] - m[1]
                        ny = abs(my - py) + abs(my)
                        for mz in range(-mz_max, mz_max + 1):
                            for pz in range(2):
                                dz = (1 - 2 * pz) * s[2] + 2 * mz * rm[2] - m[2]
                                nz = abs(mz - pz) + abs(mz)
                                order = nx + ny + nz
                                if max_order >= 0 and order > max_order:
                                    continue
                                d = sqrt(dx * dx + dy * dy + dz * dz)
                                tap = <Py_ssize_t>floor(d / c * fs + 0.5)
                                if tap < n_taps:
                                    rir[tap] += pow(beta, order) / (4.0 * M_PI * d)
    return rir_arr
