"""Convolution kernel backend selection.

The hot kernels (grouped 2D cross-correlation and its adjoints) exist twice:
a compiled Cython extension (float32 only) and a pure-numpy im2col fallback.
Availability is detected at import; per call, the compiled path is used where
it measures faster (depthwise convolutions, where im2col wastes a dense
matmul on a diagonal weight), and the BLAS-backed fallback elsewhere. Set
WFDIFF_BACKEND=python to force the fallback everywhere;
``benchmarks/bench_conv.py`` compares the two on network-typical shapes.
"""

from __future__ import annotations

import os

import numpy as np

from . import _convref

try:
    from . import _convkernels
except ImportError:
    _convkernels = None

if os.environ.get("WFDIFF_BACKEND", "").lower() == "python":
    _convkernels = None

HAS_COMPILED = _convkernels is not None


def backend_name(dtype=np.float32) -> str:
    if HAS_COMPILED and np.dtype(dtype) == np.float32:
        return "compiled"
    return "numpy"


def _use_compiled(cg: int, *arrays) -> bool:
    # cg == 1 means depthwise-style grouping (one input channel per kernel).
    return HAS_COMPILED and cg == 1 and all(a.dtype == np.float32 for a in arrays)


def conv2d_forward(x, w, stride, pad, groups):
    if _use_compiled(w.shape[1], x, w):
        return _convkernels.conv2d_forward(
            np.ascontiguousarray(x), np.ascontiguousarray(w), stride, pad, groups
        )
    return _convref.conv2d_forward(x, w, stride, pad, groups)


def conv2d_backward_input(gy, w, h, wd, stride, pad, groups):
    if _use_compiled(w.shape[1], gy, w):
        return _convkernels.conv2d_backward_input(
            np.ascontiguousarray(gy), np.ascontiguousarray(w), h, wd, stride, pad, groups
        )
    return _convref.conv2d_backward_input(gy, w, h, wd, stride, pad, groups)


def conv2d_backward_weight(gy, x, kh, kw, stride, pad, groups):
    if _use_compiled(x.shape[0] // groups, gy, x):
        return _convkernels.conv2d_backward_weight(
            np.ascontiguousarray(gy), np.ascontiguousarray(x), kh, kw, stride, pad, groups
        )
    return _convref.conv2d_backward_weight(gy, x, kh, kw, stride, pad, groups)
