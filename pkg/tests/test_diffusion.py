"""Diffusion machinery: schedule invariants, forward-marginal statistics,
oracle inversion, reverse chain, and determinism."""

import numpy as np
import pytest

from wfdiff.diffusion import (
    OracleDenoiser,
    UNetDenoiser,
    default_schedule,
    frdam_adjust,
    make_schedule,
    p_step,
    predict_x0,
    q_sample,
    sample,
    train_step,
    time_embedding,
)
from wfdiff.errors import DimensionError
from wfdiff.losses import loss_dm
from wfdiff.optim import Adam
from wfdiff.rng import Rng
from wfdiff.tensor import Tensor
from wfdiff.wavelet import SubbandSet, idwt2


@pytest.mark.parametrize("T", [10, 50, 1000])
def test_schedule_invariants(T):
    sched = make_schedule(T, 1e-4, 0.02)
    assert sched.alpha_bar[0] == 1.0
    assert sched.beta[0] == 0.0
    assert sched.sigma2[1] == 0.0
    assert np.all(np.diff(sched.alpha_bar) < 0)
    assert np.all(sched.alpha_bar > 0)
    assert np.all(sched.sigma2[1:] <= sched.beta[1:] + 1e-15)
    # Direct-product oracle for the cumulative alphas.
    prod = 1.0
    for t in range(1, T + 1):
        prod *= 1.0 - sched.beta[t]
        assert abs(sched.alpha_bar[t] - prod) < 1e-12


def test_schedule_first_step_value():
    sched = make_schedule(1000, 1e-4, 0.02)
    assert abs(sched.alpha_bar[1] - 0.9999) < 1e-12


def test_schedule_validation():
    with pytest.raises(ValueError):
        make_schedule(0, 1e-4, 0.02)
    with pytest.raises(ValueError):
        make_schedule(10, 0.0, 0.02)
    with pytest.raises(ValueError):
        make_schedule(10, 0.5, 0.2)
    with pytest.raises(ValueError):
        make_schedule(10, 0.5, 1.0)


def test_default_schedule_scales_range():
    sched = default_schedule(50)
    assert sched.T == 50
    assert abs(sched.beta[1] - 2e-3) < 1e-12
    assert abs(sched.beta[-1] - 0.4) < 1e-12


def test_q_sample_monte_carlo_moments():
    sched = make_schedule(50, 2e-3, 0.4)
    x0 = Tensor(np.full((1, 10, 10), 0.7))
    t = 20
    rng = Rng(0)
    draws = np.stack([
        q_sample(x0, t, Tensor(rng.normal((1, 10, 10)).astype(np.float32)), sched).data
        for _ in range(100)
    ])
    # 10^4 scalar draws total across the spatial grid.
    ab = sched.alpha_bar[t]
    mean, var = draws.mean(), draws.var()
    n = draws.size
    assert abs(mean - np.sqrt(ab) * 0.7) < 4.0 * np.sqrt((1 - ab) / n)
    assert abs(var - (1 - ab)) / (1 - ab) < 0.05


def test_predict_x0_inverts_q_sample_at_every_t():
    # float64: at late t the 1/sqrt(alpha_bar) factor amplifies rounding.
    sched = make_schedule(50, 2e-3, 0.4)
    rng = Rng(1)
    x0 = Tensor(rng.normal((2, 6, 6)), dtype=np.float64)
    for t in range(1, 51):
        eps = Tensor(rng.normal((2, 6, 6)), dtype=np.float64)
        x_t = q_sample(x0, t, eps, sched)
        back = predict_x0(x_t, eps, t, sched)
        assert np.max(np.abs(back.data - x0.data)) < 1e-5, t


def test_oracle_denoiser_gives_zero_loss():
    sched = make_schedule(10, 2e-3, 0.4)
    rng = Rng(2)
    x0 = Tensor(rng.normal((1, 4, 4)).astype(np.float32))
    oracle = OracleDenoiser(x0, sched)
    eps = Tensor(rng.normal((1, 4, 4)).astype(np.float32))
    x_t = q_sample(x0, 5, eps, sched)
    pred = oracle(x_t, x0, 5)
    assert float(loss_dm(eps, pred).data) < 1e-5


def test_oracle_reverse_chain_recovers_x0():
    sched = make_schedule(10, 2e-3, 0.4)
    rng = Rng(3)
    x0 = Tensor((rng.uniform((1, 8, 8)) - 0.5).astype(np.float32))
    out = sample(x0, OracleDenoiser(x0, sched), sched, rng.spawn(1))
    assert np.max(np.abs(out.data - x0.data)) < 1e-3


def test_final_step_is_deterministic():
    sched = make_schedule(10, 2e-3, 0.4)
    x1 = Tensor(Rng(4).normal((1, 4, 4)).astype(np.float32))
    cond = Tensor(np.zeros((1, 4, 4), dtype=np.float32))
    den = OracleDenoiser(cond, sched)
    a = p_step(x1, cond, 1, den, sched, Rng(5))
    b = p_step(x1, cond, 1, den, sched, Rng(6))  # different rng, same result
    assert np.array_equal(a.data, b.data)


def test_sampling_bitwise_deterministic_per_seed():
    sched = make_schedule(10, 2e-3, 0.4)
    cond = Tensor(Rng(7).normal((1, 6, 6)).astype(np.float32))
    den = UNetDenoiser(1, base=4, time_dim=8, rng=Rng(8))
    a = sample(cond, den, sched, Rng(9)).data
    b = sample(cond, den, sched, Rng(9)).data
    c = sample(cond, den, sched, Rng(10)).data
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_time_embedding_shape_and_range():
    e = time_embedding(7, 16).data
    assert e.shape == (16,)
    assert np.max(np.abs(e)) <= 1.0 + 1e-6


def test_unet_denoiser_shapes_and_time_sensitivity():
    den = UNetDenoiser(3, base=4, time_dim=8, rng=Rng(11))
    x = Tensor(Rng(12).normal((3, 8, 8)).astype(np.float32))
    cond = Tensor(Rng(13).normal((3, 8, 8)).astype(np.float32))
    out = den(x, cond, 1)
    assert out.shape == (3, 8, 8)
    # Zero-initialized output conv: untrained prediction is exactly zero.
    assert np.max(np.abs(out.data)) == 0.0
    with pytest.raises(DimensionError):
        den(x, Tensor(np.zeros((3, 6, 6), dtype=np.float32)), 1)


def test_train_step_decreases_loss_on_fixed_t():
    sched = make_schedule(10, 2e-3, 0.4)
    rng = Rng(14)
    initial = Tensor(rng.normal((1, 8, 8)).astype(np.float32))
    gt = Tensor((initial.data + 0.3).astype(np.float32))
    den = UNetDenoiser(1, base=4, time_dim=8, rng=rng.spawn(1))
    opt = Adam(den.named_parameters(), lr=2e-3)
    hist = [train_step((initial, gt), den, opt, sched, rng.spawn(2)) for _ in range(60)]
    assert np.mean(hist[-10:]) < np.mean(hist[:10])


def test_frdam_adjust_with_oracle_denoisers_recovers_ground_truth():
    sched = make_schedule(10, 2e-3, 0.4)
    rng = Rng(15)
    c, h, w = 1, 4, 4
    initial = SubbandSet(*(Tensor(rng.normal((c, h, w)).astype(np.float32)) for _ in range(4)))
    gt = SubbandSet(*(Tensor(rng.normal((c, h, w)).astype(np.float32)) for _ in range(4)))
    ll_res = Tensor(gt.ll.data - initial.ll.data)
    hf_res = Tensor(np.concatenate([gt.lh.data - initial.lh.data,
                                    gt.hl.data - initial.hl.data,
                                    gt.hh.data - initial.hh.data], axis=0))
    out = frdam_adjust(initial, OracleDenoiser(ll_res, sched), OracleDenoiser(hf_res, sched),
                       sched, Rng(16))
    ref = idwt2(gt).data
    assert np.max(np.abs(out.data - ref)) < 1e-2


def test_frdam_adjust_deterministic():
    sched = make_schedule(5, 2e-3, 0.4)
    rng = Rng(17)
    initial = SubbandSet(*(Tensor(rng.normal((1, 4, 4)).astype(np.float32)) for _ in range(4)))
    ldfb = UNetDenoiser(1, base=4, time_dim=8, rng=Rng(18))
    hdfb = UNetDenoiser(3, base=4, time_dim=8, rng=Rng(19))
    a = frdam_adjust(initial, ldfb, hdfb, sched, Rng(20)).data
    b = frdam_adjust(initial, ldfb, hdfb, sched, Rng(20)).data
    assert np.array_equal(a, b)


def test_t_range_validation():
    sched = make_schedule(10, 2e-3, 0.4)
    x = Tensor(np.zeros((1, 2, 2), dtype=np.float32))
    for bad_t in (0, 11):
        with pytest.raises(ValueError):
            q_sample(x, bad_t, x, sched)
