"""Swap diagnostics and PSNR/SSIM metrics against direct-formula oracles."""

import csv
import math

import numpy as np
import pytest

from wfdiff.errors import DimensionError
from wfdiff.freq_analysis import (
    MetricReport,
    SwapStrategy,
    analyze_corpus,
    make_colorcast_corpus,
    psnr,
    ssim,
    swap,
)
from wfdiff.imageio import Image
from wfdiff.rng import Rng
from wfdiff.tensor import Tensor


def _img(seed, c=3, h=16, w=16):
    return Image(Tensor(Rng(seed).uniform((c, h, w)).astype(np.float32)))


# -- psnr -----------------------------------------------------------------------


def test_psnr_matches_direct_formula():
    a, b = _img(0), _img(1)
    mse = np.mean((a.tensor.data.astype(np.float64) - b.tensor.data.astype(np.float64)) ** 2)
    assert abs(psnr(a, b) - 10 * math.log10(1.0 / mse)) < 1e-9


def test_psnr_identical_is_inf():
    a = _img(2)
    assert psnr(a, a) == math.inf


def test_psnr_known_uniform_error():
    # Constant error of 0.1 everywhere: MSE = 0.01, PSNR = 20 dB exactly.
    a = Image(Tensor(np.full((1, 8, 8), 0.5, dtype=np.float32)))
    b = Image(Tensor(np.full((1, 8, 8), 0.6, dtype=np.float32)))
    assert abs(psnr(a, b) - 20.0) < 1e-4


# -- ssim -----------------------------------------------------------------------


def _ssim_oracle(a, b, window=11, sigma=1.5, c1=0.01**2, c2=0.03**2):
    """Direct per-window SSIM with explicit loops (one channel)."""
    r = np.arange(window) - (window - 1) / 2.0
    k1 = np.exp(-(r**2) / (2 * sigma**2))
    k1 /= k1.sum()
    k2d = np.outer(k1, k1)
    h, w = a.shape
    vals = []
    for i in range(h - window + 1):
        for j in range(w - window + 1):
            pa = a[i:i + window, j:j + window]
            pb = b[i:i + window, j:j + window]
            mu1 = (k2d * pa).sum()
            mu2 = (k2d * pb).sum()
            s11 = (k2d * pa * pa).sum() - mu1**2
            s22 = (k2d * pb * pb).sum() - mu2**2
            s12 = (k2d * pa * pb).sum() - mu1 * mu2
            num = (2 * mu1 * mu2 + c1) * (2 * s12 + c2)
            den = (mu1**2 + mu2**2 + c1) * (s11 + s22 + c2)
            vals.append(num / den)
    return float(np.mean(vals))


def test_ssim_matches_per_window_oracle():
    a, b = _img(3, c=1, h=14, w=14), _img(4, c=1, h=14, w=14)
    ref = _ssim_oracle(a.tensor.data[0].astype(np.float64), b.tensor.data[0].astype(np.float64))
    assert abs(ssim(a, b) - ref) < 1e-10


def test_ssim_self_is_one():
    a = _img(5)
    assert abs(ssim(a, a) - 1.0) < 1e-9


def test_ssim_inversion_is_negative():
    a = Image(Tensor((Rng(6).uniform((1, 16, 16)) > 0.5).astype(np.float32)))
    b = Image(Tensor(1.0 - a.tensor.data))
    assert ssim(a, b) < 0.0


def test_ssim_rejects_small_images():
    with pytest.raises(DimensionError):
        ssim(_img(7, h=8, w=8), _img(8, h=8, w=8))


# -- swaps -----------------------------------------------------------------------


@pytest.mark.parametrize("strategy", list(SwapStrategy))
def test_self_swap_is_identity(strategy):
    a = _img(9)
    oa, ob = swap(a, a, strategy)
    assert np.max(np.abs(oa.tensor.data - a.tensor.data)) < 1e-5
    assert np.max(np.abs(ob.tensor.data - a.tensor.data)) < 1e-5


@pytest.mark.parametrize("strategy", list(SwapStrategy))
def test_double_swap_is_involution(strategy):
    a, b = _img(10), _img(11)
    oa, ob = swap(a, b, strategy)
    ra, rb = swap(oa, ob, strategy)
    assert np.max(np.abs(ra.tensor.data - a.tensor.data)) < 1e-4
    assert np.max(np.abs(rb.tensor.data - b.tensor.data)) < 1e-4


def test_s1_transfers_dc_mean():
    # After a full-image amplitude swap each output carries the other's mean.
    a = Image(Tensor(np.full((1, 8, 8), 0.25, dtype=np.float32)))
    b = Image(Tensor(np.full((1, 8, 8), 0.75, dtype=np.float32)))
    oa, ob = swap(a, b, SwapStrategy.S1)
    assert abs(float(oa.tensor.data.mean()) - 0.75) < 1e-4
    assert abs(float(ob.tensor.data.mean()) - 0.25) < 1e-4


def test_swap_handles_odd_extents():
    a, b = _img(12, h=15, w=13), _img(13, h=15, w=13)
    oa, _ = swap(a, b, SwapStrategy.S3)
    assert oa.tensor.shape == (3, 15, 13)


def test_swap_shape_mismatch():
    with pytest.raises(DimensionError):
        swap(_img(14, h=8, w=8), _img(15, h=10, w=10), SwapStrategy.S1)


# -- corpus analysis -----------------------------------------------------------------


def test_corpus_ordering_s3_beats_s2():
    pairs = make_colorcast_corpus(20, size=32, seed=0)
    r2 = analyze_corpus(pairs, SwapStrategy.S2)
    r3 = analyze_corpus(pairs, SwapStrategy.S3)
    assert len(r2.rows) == len(r3.rows) == 20
    assert r3.mean_psnr >= r2.mean_psnr


def test_report_csv_mean_recomputation(tmp_path):
    pairs = make_colorcast_corpus(5, size=32, seed=1)
    report = analyze_corpus(pairs, SwapStrategy.S1)
    p = tmp_path / "report.csv"
    report.write_csv(p)
    with open(p, newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["pair_id", "psnr_db", "ssim"]
    body, mean_row = rows[1:-1], rows[-1]
    assert mean_row[0] == "mean"
    assert abs(float(mean_row[1]) - np.mean([float(r[1]) for r in body])) < 1e-4
    assert abs(float(mean_row[2]) - np.mean([float(r[2]) for r in body])) < 1e-4


def test_corpus_skips_unreadable_pairs(tmp_path):
    pairs = make_colorcast_corpus(3, size=32, seed=2)
    pairs.append((str(tmp_path / "missing.ppm"), str(tmp_path / "missing2.ppm")))
    report = analyze_corpus(pairs, SwapStrategy.S1)
    assert len(report.rows) == 3
    assert len(report.errors) == 1


def test_corpus_empty_and_all_bad(tmp_path):
    with pytest.raises(ValueError):
        analyze_corpus([], SwapStrategy.S1)
    with pytest.raises(ValueError):
        analyze_corpus([(str(tmp_path / "x"), str(tmp_path / "y"))], SwapStrategy.S1)


def test_colorcast_corpus_is_deterministic():
    a = make_colorcast_corpus(2, size=16, seed=3)
    b = make_colorcast_corpus(2, size=16, seed=3)
    for (d1, r1), (d2, r2) in zip(a, b):
        assert np.array_equal(d1.tensor.data, d2.tensor.data)
        assert np.array_equal(r1.tensor.data, r2.tensor.data)
