"""Pure-numpy grouped 2D cross-correlation via im2col.

Reference implementation and fallback when the compiled kernels are not
available (or for dtypes other than float32).
"""

from __future__ import annotations

import numpy as np


def _im2col(x: np.ndarray, kh: int, kw: int, stride: int, pad: int) -> np.ndarray:
    """Gather sliding windows of a padded [C,H,W] array into [C, kh, kw, Ho, Wo]."""
    c, h, w = x.shape
    ho = (h + 2 * pad - kh) // stride + 1
    wo = (w + 2 * pad - kw) // stride + 1
    if pad:
        x = np.pad(x, ((0, 0), (pad, pad), (pad, pad)))
    s0, s1, s2 = x.strides
    cols = np.lib.stride_tricks.as_strided(
        x,
        shape=(c, kh, kw, ho, wo),
        strides=(s0, s1, s2, s1 * stride, s2 * stride),
        writeable=False,
    )
    return cols


def conv2d_forward(x, w, stride, pad, groups):
    c_in, h_in, w_in = x.shape
    c_out, cg, kh, kw = w.shape
    cols = _im2col(x, kh, kw, stride, pad)  # [C, kh, kw, Ho, Wo]
    ho, wo = cols.shape[3], cols.shape[4]
    cols = cols.reshape(groups, cg * kh * kw, ho * wo)
    wm = w.reshape(groups, c_out // groups, cg * kh * kw)
    out = np.matmul(wm, cols)
    return np.ascontiguousarray(out.reshape(c_out, ho, wo))


def conv2d_backward_weight(gy, x, kh, kw, stride, pad, groups):
    c_out, ho, wo = gy.shape
    c_in = x.shape[0]
    cg = c_in // groups
    cols = _im2col(x, kh, kw, stride, pad).reshape(groups, cg * kh * kw, ho * wo)
    gym = gy.reshape(groups, c_out // groups, ho * wo)
    gw = np.matmul(gym, cols.transpose(0, 2, 1))
    return np.ascontiguousarray(gw.reshape(c_out, cg, kh, kw))


def conv2d_backward_input(gy, w, h, wd, stride, pad, groups):
    c_out, ho, wo = gy.shape
    _, cg, kh, kw = w.shape
    c_in = groups * cg
    wm = w.reshape(groups, c_out // groups, cg * kh * kw)
    gym = gy.reshape(groups, c_out // groups, ho * wo)
    gcols = np.matmul(wm.transpose(0, 2, 1), gym)
    gcols = gcols.reshape(c_in, kh, kw, ho, wo)
    # col2im scatter-add over the kh*kw taps; loop is over kernel taps only.
    gx = np.zeros((c_in, h + 2 * pad, wd + 2 * pad), dtype=gy.dtype)
    for p in range(kh):
        for q in range(kw):
            gx[:, p : p + ho * stride : stride, q : q + wo * stride : stride] += gcols[:, p, q]
    if pad:
        gx = gx[:, pad : pad + h, pad : pad + wd]
    return np.ascontiguousarray(gx)
