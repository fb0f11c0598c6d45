"""Unitary 2D discrete Fourier transform and amplitude/phase factorization.

The transform is normalized by 1/sqrt(HW) in *both* directions (unitary), so
Parseval holds exactly: sum(x^2) == sum(amplitude^2). Note most FFT libraries
default to non-unitary scaling; here the scaling is pinned by the golden
examples (a 2x2 constant-1 image has DC amplitude 2).

Besides the plain array-level API there are two graph-recorded ops,
``spectrum_of`` and ``image_from_spectrum``, which make the amplitude/phase
factorization differentiable for the network blocks and the amplitude loss.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, SymmetryError
from .tensor import Tensor, _accum, _make

IMAG_RESIDUE_TOL = 1e-4


@dataclass
class Spectrum:
    """Per-channel amplitude (>= 0) and phase (radians) planes."""

    amplitude: Tensor
    phase: Tensor

    @property
    def shape(self):
        return self.amplitude.shape


def _dft2(x: np.ndarray) -> np.ndarray:
    """Unitary forward DFT over the last two axes (complex128)."""
    return np.fft.fft2(x.astype(np.float64), norm="ortho")


def _idft2(spec: np.ndarray) -> np.ndarray:
    """Unitary inverse DFT over the last two axes (complex128)."""
    return np.fft.ifft2(spec, norm="ortho")


def _amp_phase(spec: np.ndarray):
    amp = np.abs(spec)
    # np.angle(0) == 0, matching the zero-amplitude phase convention.
    phase = np.angle(spec)
    return amp, phase


def fft2(x: Tensor) -> Spectrum:
    if x.data.ndim != 3:
        raise DimensionError(f"expected [C,H,W], got {x.shape}")
    amp, phase = _amp_phase(_dft2(x.data))
    return Spectrum(Tensor(amp.astype(x.dtype)), Tensor(phase.astype(x.dtype)))


def ifft2(s: Spectrum) -> Tensor:
    if s.amplitude.shape != s.phase.shape:
        raise DimensionError("amplitude/phase shapes differ")
    spec = s.amplitude.data.astype(np.float64) * np.exp(1j * s.phase.data.astype(np.float64))
    out = _idft2(spec)
    residue = float(np.abs(out.imag).max())
    if residue > IMAG_RESIDUE_TOL:
        raise SymmetryError(
            f"imaginary residue {residue:.3e} exceeds {IMAG_RESIDUE_TOL:g}; "
            "spectrum does not come from a real image"
        )
    return Tensor(out.real.astype(s.amplitude.dtype))


def recombine(amp_from: Spectrum, phase_from: Spectrum) -> Tensor:
    """Image with the amplitude of one spectrum and the phase of another."""
    if amp_from.shape != phase_from.shape:
        raise DimensionError(f"spectrum shapes differ: {amp_from.shape} vs {phase_from.shape}")
    return ifft2(Spectrum(amp_from.amplitude, phase_from.phase))


# -- differentiable graph ops ---------------------------------------------------


def spectrum_of(x: Tensor):
    """Graph-recorded amplitude/phase of the unitary DFT of x.

    Returns (amplitude, phase) tensors wired into the autodiff graph. Because
    the DFT is unitary, the adjoint of the transform is the inverse DFT; the
    amplitude/phase factorization contributes the usual polar-coordinate
    Jacobian. Gradients at zero-amplitude bins are defined as 0.
    """
    spec = _dft2(x.data)
    amp_np, phase_np = _amp_phase(spec)
    re, im = spec.real, spec.imag
    # At zero-amplitude bins re == im == 0, so the masked quotients below are 0.
    safe_amp = np.where(amp_np > 0.0, amp_np, 1.0)
    amp2 = safe_amp * safe_amp

    def _to_x(g_re, g_im):
        # grad wrt x of L given dL/dRe and dL/dIm: Re(F^{-1}(g_re + i g_im)).
        return _idft2(g_re + 1j * g_im).real.astype(x.dtype)

    def bw_amp(g):
        g = g.astype(np.float64)
        _accum(x, _to_x(g * re / safe_amp, g * im / safe_amp))

    def bw_phase(g):
        g = g.astype(np.float64)
        _accum(x, _to_x(-g * im / amp2, g * re / amp2))

    amp = _make(amp_np.astype(x.dtype), (x,), bw_amp)
    phase = _make(phase_np.astype(x.dtype), (x,), bw_phase)
    return amp, phase


def image_from_spectrum(amp: Tensor, phase: Tensor) -> Tensor:
    """Graph-recorded real part of the inverse DFT of amp * exp(i*phase).

    Used inside network blocks where learned per-bin maps break conjugate
    symmetry: the imaginary residue is projected out (real part taken) rather
    than raising, keeping the op differentiable. The strict-checking inverse
    for external data is ``ifft2``.
    """
    if amp.shape != phase.shape:
        raise DimensionError("amplitude/phase shapes differ")
    a = amp.data.astype(np.float64)
    p = phase.data.astype(np.float64)
    eip = np.exp(1j * p)
    out = _idft2(a * eip)
    data = out.real.astype(amp.dtype)

    def bw(g):
        # Adjoint of Re o IDFT is DFT restricted to its real part's pullback:
        # dL/dspec = F(g) (treating g as a real image).
        gspec = _dft2(g.astype(np.float64))
        _accum(amp, (gspec * np.conj(eip)).real.astype(amp.dtype))
        _accum(phase, ((gspec * np.conj(eip)).imag * a).astype(phase.dtype))

    return _make(data, (amp, phase), bw)
