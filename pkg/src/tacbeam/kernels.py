"""Kernel backend selection.

The compiled extension is preferred; set ``TACBEAM_PURE_PYTHON=1`` to force
the numpy fallback.
"""
import os

if os.environ.get("TACBEAM_PURE_PYTHON"):
    from tacbeam import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from tacbeam import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        from tacbeam import _kernels_py as _impl

        BACKEND = "python"

lstm_forward = _impl.lstm_forward
lstm_backward = _impl.lstm_backward
image_source_rir = _impl.image_source_rir

__all__ = ["BACKEND", "lstm_forward", "lstm_backward", "image_source_rir"]
