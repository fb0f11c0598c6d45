"""Compiled vs pure-numpy convolution backends must agree."""

import numpy as np
import pytest

from wfdiff import backend
from wfdiff._convref import conv2d_backward_input, conv2d_backward_weight, conv2d_forward
from wfdiff.rng import Rng

compiled = pytest.mark.skipif(not backend.HAS_COMPILED, reason="compiled extension not built")


def test_backend_name_reflects_dtype():
    if backend.HAS_COMPILED:
        assert backend.backend_name(np.float32) == "compiled"
    assert backend.backend_name(np.float64) == "numpy"


@compiled
@pytest.mark.parametrize("stride,pad,groups,k", [(1, 1, 1, 3), (2, 0, 1, 2), (1, 2, 2, 5), (1, 0, 4, 1)])
def test_forward_parity(stride, pad, groups, k):
    rng = Rng(0)
    x = rng.normal((4, 8, 8)).astype(np.float32)
    w = rng.normal((8, 4 // groups, k, k)).astype(np.float32)
    a = backend._convkernels.conv2d_forward(x, w, stride, pad, groups)
    b = conv2d_forward(x, w, stride, pad, groups)
    assert np.max(np.abs(a - b)) < 1e-4


@compiled
def test_backward_parity():
    rng = Rng(1)
    x = rng.normal((4, 8, 8)).astype(np.float32)
    w = rng.normal((6, 2, 3, 3)).astype(np.float32)
    gy = rng.normal((6, 8, 8)).astype(np.float32)
    gi_a = backend._convkernels.conv2d_backward_input(gy, w, 8, 8, 1, 1, 2)
    gi_b = conv2d_backward_input(gy, w, 8, 8, 1, 1, 2)
    gw_a = backend._convkernels.conv2d_backward_weight(gy, x, 3, 3, 1, 1, 2)
    gw_b = conv2d_backward_weight(gy, x, 3, 3, 1, 1, 2)
    assert np.max(np.abs(gi_a - gi_b)) < 1e-4
    assert np.max(np.abs(gw_a - gw_b)) < 1e-4


def test_float64_routes_to_numpy_reference():
    rng = Rng(2)
    x = rng.normal((2, 6, 6))
    w = rng.normal((3, 2, 3, 3))
    out = backend.conv2d_forward(x, w, 1, 1, 1)
    ref = conv2d_forward(x, w, 1, 1, 1)
    assert np.array_equal(out, ref)
