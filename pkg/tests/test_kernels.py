"""The compiled and pure-Python kernels must agree."""
import os
import subprocess
import sys

import numpy as np
import pytest

from tacbeam import _kernels_py as pure
from tacbeam import kernels

compiled = pytest.importorskip("tacbeam._kernels")


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")


@pytest.mark.parametrize("T,B,H", [(1, 1, 1), (7, 5, 3), (20, 13, 8)])
def test_lstm_forward_parity(rng, T, B, H):
    xg = rng.standard_normal((T, B, 4 * H))
    wh = 0.5 * rng.standard_normal((H, 4 * H))
    for a, b in zip(compiled.lstm_forward(xg, wh), pure.lstm_forward(xg, wh)):
        np.testing.assert_allclose(a, b, atol=1e-13)


@pytest.mark.parametrize("T,B,H", [(1, 2, 2), (9, 4, 5)])
def test_lstm_backward_parity(rng, T, B, H):
    xg = rng.standard_normal((T, B, 4 * H))
    wh = 0.5 * rng.standard_normal((H, 4 * H))
    h, c, acts = pure.lstm_forward(xg, wh)
    dh = rng.standard_normal((T, B, H))
    np.testing.assert_allclose(
        compiled.lstm_backward(dh, c, acts, wh), pure.lstm_backward(dh, c, acts, wh), atol=1e-13
    )


def test_lstm_shape_check(rng):
    with pytest.raises(ValueError):
        compiled.lstm_forward(rng.standard_normal((3, 2, 8)), rng.standard_normal((3, 8)))


@pytest.mark.parametrize("beta,order", [(0.0, -1), (0.7, 2), (0.9, -1)])
def test_rir_parity(rng, beta, order):
    room = np.array([4.3, 3.7, 2.9])
    src = np.array([1.1, 2.2, 1.4])
    mic = np.array([3.0, 1.0, 1.7])
    a = compiled.image_source_rir(room, src, mic, beta, 16000.0, 3000, 343.0, order)
    b = pure.image_source_rir(room, src, mic, beta, 16000.0, 3000, 343.0, order)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)


def test_lstm_non_finite_propagation(rng):
    H = 4
    xg = 30 * rng.standard_normal((6, 3, 4 * H))
    xg[0, 0, :5] = [np.inf, -np.inf, 800.0, -800.0, np.nan]
    wh = 0.3 * rng.standard_normal((H, 4 * H))
    with np.errstate(all="ignore"):
        for a, b in zip(compiled.lstm_forward(xg, wh), pure.lstm_forward(xg, wh)):
            assert np.array_equal(np.isnan(a), np.isnan(b))
            np.testing.assert_allclose(a[~np.isnan(a)], b[~np.isnan(b)], atol=1e-13)


def test_lstm_empty_batch():
    h, c, a = compiled.lstm_forward(np.zeros((3, 0, 8)), np.zeros((2, 8)))
    assert h.shape == (3, 0, 2) and a.shape == (3, 0, 8)


def test_denormals_survive_import():
    tiny = np.array([5e-324, 1e-310])
    assert tiny[0] * 1.0 != 0.0 and tiny[1] / 2 != 0.0


def test_forced_fallback():
    env = dict(os.environ, TACBEAM_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import tacbeam.kernels as k; print(k.BACKEND)"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert out.stdout.strip() == "python"
