"""Unitary Fourier transform: direct DFT oracle, Parseval, golden values,
recombination identities, and adjoints of the differentiable ops."""

import numpy as np
import pytest

from wfdiff.errors import DimensionError, SymmetryError
from wfdiff.fourier import (
    Spectrum,
    fft2,
    ifft2,
    image_from_spectrum,
    recombine,
    spectrum_of,
)
from wfdiff.rng import Rng
from wfdiff.tensor import Tensor, backward


def _direct_dft(x):
    """O(N^4) unitary DFT by explicit summation (the independent oracle)."""
    c, h, w = x.shape
    out = np.zeros((c, h, w), dtype=np.complex128)
    for ch in range(c):
        for u in range(h):
            for v in range(w):
                acc = 0.0 + 0.0j
                for m in range(h):
                    for n in range(w):
                        acc += x[ch, m, n] * np.exp(-2j * np.pi * (u * m / h + v * n / w))
                out[ch, u, v] = acc / np.sqrt(h * w)
    return out


def test_fft2_matches_direct_summation():
    x = Rng(0).normal((1, 8, 8))
    spec = fft2(Tensor(x.astype(np.float64)))
    ref = _direct_dft(x)
    assert np.max(np.abs(spec.amplitude.data - np.abs(ref))) < 1e-10
    # Compare as complex values so phase wrap-around is irrelevant.
    got = spec.amplitude.data * np.exp(1j * spec.phase.data)
    assert np.max(np.abs(got - ref)) < 1e-10


def test_parseval():
    x = Rng(1).normal((3, 12, 10))
    spec = fft2(Tensor(x))
    e_img = float((x.astype(np.float64) ** 2).sum())
    e_spec = float((spec.amplitude.data.astype(np.float64) ** 2).sum())
    assert abs(e_img - e_spec) / e_img < 1e-6


def test_roundtrip_identity():
    x = Rng(2).normal((3, 8, 6)).astype(np.float64)
    back = ifft2(fft2(Tensor(x))).data
    assert np.max(np.abs(back - x)) < 1e-10


def test_golden_constant_image():
    # 2x2 constant-1 image: DC amplitude 2 (= sqrt(HW) * mean * ... unitary), rest 0.
    spec = fft2(Tensor(np.ones((1, 2, 2))))
    assert abs(spec.amplitude.data[0, 0, 0] - 2.0) < 1e-12
    assert np.max(np.abs(spec.amplitude.data.reshape(-1)[1:])) < 1e-12
    # Phase of zero-amplitude bins is the 0 convention.
    assert np.max(np.abs(spec.phase.data)) < 1e-12


def test_golden_delta_image():
    # Delta at origin of a 2x2 grid: flat amplitude 1/sqrt(HW) = 0.5, zero phase.
    x = np.zeros((1, 2, 2))
    x[0, 0, 0] = 1.0
    spec = fft2(Tensor(x))
    assert np.allclose(spec.amplitude.data, 0.5, atol=1e-12)
    assert np.allclose(spec.phase.data, 0.0, atol=1e-12)


def test_dc_carries_mean():
    x = Rng(3).normal((1, 6, 4))
    spec = fft2(Tensor(x))
    dc = spec.amplitude.data[0, 0, 0] * np.cos(spec.phase.data[0, 0, 0])
    assert abs(dc - x.sum() / np.sqrt(24)) < 1e-5


def test_recombine_self_is_identity():
    x = Rng(4).normal((1, 8, 8)).astype(np.float64)
    spec = fft2(Tensor(x))
    back = recombine(amp_from=spec, phase_from=spec).data
    assert np.max(np.abs(back - x)) < 1e-10


def test_recombine_shape_mismatch():
    a = fft2(Tensor(np.ones((1, 4, 4))))
    b = fft2(Tensor(np.ones((1, 6, 6))))
    with pytest.raises(DimensionError):
        recombine(a, b)


def test_ifft2_rejects_asymmetric_spectrum():
    # Amplitude concentrated in a single non-DC bin has no real preimage.
    amp = np.zeros((1, 4, 4))
    amp[0, 1, 2] = 1.0
    with pytest.raises(SymmetryError):
        ifft2(Spectrum(Tensor(amp), Tensor(np.zeros((1, 4, 4)))))


def test_conjugate_symmetry_of_real_input():
    x = Rng(5).normal((1, 6, 6))
    spec = fft2(Tensor(x.astype(np.float64)))
    z = spec.amplitude.data * np.exp(1j * spec.phase.data)
    for u in range(6):
        for v in range(6):
            assert abs(z[0, u, v] - np.conj(z[0, -u % 6, -v % 6])) < 1e-10


# -- differentiable ops --------------------------------------------------------------


def _fd_grad(f, x0, h=1e-5):
    g = np.zeros_like(x0)
    flat, gflat = x0.reshape(-1), g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = f(x0)
        flat[i] = orig - h
        fm = f(x0)
        flat[i] = orig
        gflat[i] = (fp - fm) / (2 * h)
    return g


def test_spectrum_of_gradients_match_finite_differences():
    x0 = Rng(6).normal((1, 4, 4))
    target = Rng(7).normal((1, 4, 4)) ** 2 + 0.5

    def loss_amp(arr):
        amp, _ = spectrum_of(Tensor(arr.copy()))
        return float(((amp.data - target) ** 2).sum())

    x = Tensor(x0.copy(), requires_grad=True, dtype=np.float64)
    amp, phase = spectrum_of(x)
    backward(((amp - Tensor(target, dtype=np.float64)) * (amp - Tensor(target, dtype=np.float64))).sum())
    fd = _fd_grad(loss_amp, x0.copy())
    denom = np.maximum(np.maximum(np.abs(x.grad), np.abs(fd)), 1e-6)
    assert np.max(np.abs(x.grad - fd) / denom) < 1e-3


def test_image_from_spectrum_gradients_match_finite_differences():
    rng = Rng(8)
    base = fft2(Tensor(rng.normal((1, 4, 4)).astype(np.float64)))
    a0 = base.amplitude.data.copy()
    p0 = base.phase.data.copy()
    w = rng.normal((1, 4, 4))

    amp = Tensor(a0.copy(), requires_grad=True, dtype=np.float64)
    phase = Tensor(p0.copy(), requires_grad=True, dtype=np.float64)
    out = image_from_spectrum(amp, phase)
    backward((out * Tensor(w, dtype=np.float64)).sum())

    def loss_of(a, p):
        return float((image_from_spectrum(Tensor(a.copy()), Tensor(p.copy())).data * w).sum())

    fd_a = _fd_grad(lambda a: loss_of(a, p0), a0.copy())
    fd_p = _fd_grad(lambda p: loss_of(a0, p), p0.copy())
    for analytic, fd in ((amp.grad, fd_a), (phase.grad, fd_p)):
        denom = np.maximum(np.maximum(np.abs(analytic), np.abs(fd)), 1e-6)
        assert np.max(np.abs(analytic - fd) / denom) < 1e-3


def test_spectrum_roundtrip_through_graph_ops():
    x = Rng(9).normal((2, 6, 6)).astype(np.float64)
    amp, phase = spectrum_of(Tensor(x))
    back = image_from_spectrum(amp, phase).data
    assert np.max(np.abs(back - x)) < 1e-10
