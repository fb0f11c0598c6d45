"""Single-level 2D Haar wavelet transform.

Orthonormal convention: for each 2x2 block [[a,b],[c,d]] of a channel,

    ll = (a+b+c+d)/2    hl = (a-b+c-d)/2
    lh = (a+b-c-d)/2    hh = (a-b-c+d)/2

which is separable filtering with low-pass (1,1)/sqrt(2) and high-pass
(1,-1)/sqrt(2) followed by stride-2 downsampling. The transform is exactly
invertible and energy-preserving. lh carries vertical detail (high-pass
across rows), hl horizontal detail.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .tensor import Tensor


@dataclass
class SubbandSet:
    """The four half-resolution subbands of one [C,H,W] image."""

    ll: Tensor
    lh: Tensor
    hl: Tensor
    hh: Tensor

    def bands(self):
        return {"ll": self.ll, "lh": self.lh, "hl": self.hl, "hh": self.hh}

    @property
    def shape(self):
        return self.ll.shape


def dwt2(img: Tensor) -> SubbandSet:
    x = img.data
    if x.ndim != 3:
        raise DimensionError(f"expected [C,H,W], got {x.shape}")
    c, h, w = x.shape
    if h % 2 or w % 2:
        raise DimensionError(f"extents must be even, got {h}x{w} (pad_even first)")
    a = x[:, 0::2, 0::2]
    b = x[:, 0::2, 1::2]
    cc = x[:, 1::2, 0::2]
    d = x[:, 1::2, 1::2]
    ll = (a + b + cc + d) * 0.5
    hl = (a - b + cc - d) * 0.5
    lh = (a + b - cc - d) * 0.5
    hh = (a - b - cc + d) * 0.5
    return SubbandSet(Tensor(ll), Tensor(lh), Tensor(hl), Tensor(hh))


def idwt2(s: SubbandSet) -> Tensor:
    ll, lh, hl, hh = s.ll.data, s.lh.data, s.hl.data, s.hh.data
    if not (ll.shape == lh.shape == hl.shape == hh.shape):
        raise DimensionError("subband shapes differ")
    c, hh2, ww2 = ll.shape
    out = np.empty((c, 2 * hh2, 2 * ww2), dtype=ll.dtype)
    out[:, 0::2, 0::2] = (ll + hl + lh + hh) * 0.5
    out[:, 0::2, 1::2] = (ll - hl + lh - hh) * 0.5
    out[:, 1::2, 0::2] = (ll + hl - lh - hh) * 0.5
    out[:, 1::2, 1::2] = (ll - hl - lh + hh) * 0.5
    return Tensor(out)


def pad_even(img: Tensor):
    """Reflect-pad odd extents by one row/column; returns (padded, (H, W))."""
    x = img.data
    c, h, w = x.shape
    ph = h % 2
    pw = w % 2
    if ph or pw:
        x = np.pad(x, ((0, 0), (0, ph), (0, pw)), mode="reflect")
    return Tensor(x), (h, w)


def crop_to(img: Tensor, extents) -> Tensor:
    """Inverse of pad_even: crop back to the recorded extents."""
    h, w = extents
    return Tensor(np.ascontiguousarray(img.data[:, :h, :w]))
