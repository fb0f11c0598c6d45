# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled grouped 2D cross-correlation kernels (forward + both adjoints).

float32 only; other dtypes take the numpy fallback path (see backend.py).
Loops are ordered so the innermost runs over contiguous output/input rows
(per-tap saxpy / dot), which the C compiler vectorizes. All loops are
sequential, so results are deterministic.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline int _jlo(int pad, int q, int stride) nogil:
    # Smallest j with j*stride + q - pad >= 0.
    cdef int num = pad - q
    if num <= 0:
        return 0
    return (num + stride - 1) // stride


cdef inline int _jhi(int extent, int pad, int q, int stride, int limit) nogil:
    # One past the largest j with j*stride + q - pad <= extent - 1, capped.
    cdef int hi = (extent - 1 + pad - q) // stride + 1
    return hi if hi < limit else limit


def conv2d_forward(cnp.float32_t[:, :, ::1] x,
                   cnp.float32_t[:, :, :, ::1] w,
                   int stride, int pad, int groups):
    cdef int c_in = x.shape[0], h = x.shape[1], wd = x.shape[2]
    cdef int c_out = w.shape[0], cg = w.shape[1]
    cdef int kh = w.shape[2], kw = w.shape[3]
    cdef int ho = (h + 2 * pad - kh) // stride + 1
    cdef int wo = (wd + 2 * pad - kw) // stride + 1
    cdef int og = c_out // groups
    out_arr = np.zeros((c_out, ho, wo), dtype=np.float32)
    cdef cnp.float32_t[:, :, ::1] out = out_arr
    cdef int co, g, ci, i, j, p, q, ih, ilo, ihi, jlo, jhi, base
    cdef cnp.float32_t wv
    for co in range(c_out):
        g = co // og
        for ci in range(cg):
            for p in range(kh):
                ilo = _jlo(pad, p, stride)
                ihi = _jhi(h, pad, p, stride, ho)
                for q in range(kw):
                    wv = w[co, ci, p, q]
                    if wv == 0.0:
                        continue
                    jlo = _jlo(pad, q, stride)
                    jhi = _jhi(wd, pad, q, stride, wo)
                    base = q - pad
                    for i in range(ilo, ihi):
                        ih = i * stride + p - pad
                        if stride == 1:
                            for j in range(jlo, jhi):
                                out[co, i, j] += wv * x[g * cg + ci, ih, j + base]
                        else:
                            for j in range(jlo, jhi):
                                out[co, i, j] += wv * x[g * cg + ci, ih, j * stride + base]
    return out_arr


def conv2d_backward_input(cnp.float32_t[:, :, ::1] gy,
                          cnp.float32_t[:, :, :, ::1] w,
                          int h, int wd, int stride, int pad, int groups):
    cdef int c_out = gy.shape[0], ho = gy.shape[1], wo = gy.shape[2]
    cdef int cg = w.shape[1], kh = w.shape[2], kw = w.shape[3]
    cdef int og = c_out // groups
    cdef int c_in = groups * cg
    gx_arr = np.zeros((c_in, h, wd), dtype=np.float32)
    cdef cnp.float32_t[:, :, ::1] gx = gx_arr
    cdef int co, g, ci, i, j, p, q, ih, ilo, ihi, jlo, jhi, base
    cdef cnp.float32_t wv
    for co in range(c_out):
        g = co // og
        for ci in range(cg):
            for p in range(kh):
                ilo = _jlo(pad, p, stride)
                ihi = _jhi(h, pad, p, stride, ho)
                for q in range(kw):
                    wv = w[co, ci, p, q]
                    if wv == 0.0:
                        continue
                    jlo = _jlo(pad, q, stride)
                    jhi = _jhi(wd, pad, q, stride, wo)
                    base = q - pad
                    for i in range(ilo, ihi):
                        ih = i * stride + p - pad
                        if stride == 1:
                            for j in range(jlo, jhi):
                                gx[g * cg + ci, ih, j + base] += wv * gy[co, i, j]
                        else:
                            for j in range(jlo, jhi):
                                gx[g * cg + ci, ih, j * stride + base] += wv * gy[co, i, j]
    return gx_arr


def conv2d_backward_weight(cnp.float32_t[:, :, ::1] gy,
                           cnp.float32_t[:, :, ::1] x,
                           int kh, int kw, int stride, int pad, int groups):
    cdef int c_out = gy.shape[0], ho = gy.shape[1], wo = gy.shape[2]
    cdef int c_in = x.shape[0], h = x.shape[1], wd = x.shape[2]
    cdef int cg = c_in // groups
    cdef int og = c_out // groups
    gw_arr = np.zeros((c_out, cg, kh, kw), dtype=np.float32)
    cdef cnp.float32_t[:, :, :, ::1] gw = gw_arr
    cdef int co, g, ci, i, j, p, q, ih, ilo, ihi, jlo, jhi, base
    cdef double acc
    for co in range(c_out):
        g = co // og
        for ci in range(cg):
            for p in range(kh):
                ilo = _jlo(pad, p, stride)
                ihi = _jhi(h, pad, p, stride, ho)
                for q in range(kw):
                    jlo = _jlo(pad, q, stride)
                    jhi = _jhi(wd, pad, q, stride, wo)
                    base = q - pad
                    acc = 0.0
                    for i in range(ilo, ihi):
                        ih = i * stride + p - pad
                        if stride == 1:
                            for j in range(jlo, jhi):
                                acc += gy[co, i, j] * x[g * cg + ci, ih, j + base]
                        else:
                            for j in range(jlo, jhi):
                                acc += gy[co, i, j] * x[g * cg + ci, ih, j * stride + base]
                    gw[co, ci, p, q] = <cnp.float32_t> acc
    return gw_arr
