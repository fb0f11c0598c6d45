"""Residual denoising diffusion over wavelet subbands.

Two conditional DDPM chains adjust the output of the first enhancement stage:
one over the low-frequency subband, one over the three detail subbands
stacked along the channel axis. Both model the residual between ground truth
and initial enhancement rather than the band itself.

Schedule convention: arrays are indexed 1..T with alpha_bar[0] = 1, which
makes the reverse-step variance at t=1 exactly zero. The reverse mean is

    mu = (x_t - beta_t / sqrt(1 - alpha_bar_t) * eps_hat) / sqrt(alpha_t)

the standard DDPM posterior mean in epsilon form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .blocks import Conv2d, Linear, Module
from .errors import DimensionError
from .losses import loss_dm
from .optim import Adam
from .rng import Rng
from .tensor import Tensor, backward
from .wavelet import SubbandSet, idwt2


@dataclass
class DiffusionSchedule:
    """Precomputed noise schedule; index 0 is the alpha_bar[0]=1 convention slot."""

    T: int
    beta: np.ndarray       # beta[0] == 0, beta[1..T] the actual schedule
    alpha: np.ndarray      # 1 - beta
    alpha_bar: np.ndarray  # cumulative product, alpha_bar[0] == 1
    sigma2: np.ndarray     # posterior variances, sigma2[1] == 0


def make_schedule(T: int, beta_start: float, beta_end: float) -> DiffusionSchedule:
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    if not (0.0 < beta_start <= beta_end < 1.0):
        raise ValueError(f"need 0 < beta_start <= beta_end < 1, got [{beta_start}, {beta_end}]")
    beta = np.zeros(T + 1, dtype=np.float64)
    beta[1:] = np.linspace(beta_start, beta_end, T)
    alpha = 1.0 - beta
    alpha_bar = np.cumprod(alpha)
    sigma2 = np.zeros(T + 1, dtype=np.float64)
    sigma2[1:] = (1.0 - alpha_bar[:-1]) / (1.0 - alpha_bar[1:]) * beta[1:]
    return DiffusionSchedule(T=T, beta=beta, alpha=alpha, alpha_bar=alpha_bar, sigma2=sigma2)


def default_schedule(T: int = 50) -> DiffusionSchedule:
    """Linear 1e-4..0.02 schedule at T=1000, range scaled ~1000/T for desk-scale T."""
    scale = 1000.0 / T
    return make_schedule(T, min(1e-4 * scale, 0.5), min(0.02 * scale, 0.999))


def _check_t(t: int, sched: DiffusionSchedule):
    if not 1 <= t <= sched.T:
        raise ValueError(f"t={t} outside [1, {sched.T}]")


def q_sample(x0: Tensor, t: int, eps: Tensor, sched: DiffusionSchedule) -> Tensor:
    """Forward marginal: x_t = sqrt(ab_t) x0 + sqrt(1 - ab_t) eps."""
    _check_t(t, sched)
    if x0.shape != eps.shape:
        raise DimensionError(f"x0/eps shapes differ: {x0.shape} vs {eps.shape}")
    ab = sched.alpha_bar[t]
    data = np.sqrt(ab) * x0.data + np.sqrt(1.0 - ab) * eps.data
    return Tensor(data.astype(x0.dtype))


def predict_x0(x_t: Tensor, eps_hat: Tensor, t: int, sched: DiffusionSchedule) -> Tensor:
    """Algebraic inversion of the forward marginal given a noise estimate."""
    _check_t(t, sched)
    ab = sched.alpha_bar[t]
    data = (x_t.data - np.sqrt(1.0 - ab) * eps_hat.data) / np.sqrt(ab)
    return Tensor(data.astype(x_t.dtype))


# -- denoisers --------------------------------------------------------------------


class OracleDenoiser:
    """Test double: knows the clean residual and returns the noise exactly.

    Given x_t it solves the forward marginal for the eps that maps the stored
    x0 to x_t, so predict_x0 recovers x0 to rounding error at any t.
    """

    def __init__(self, x0: Tensor, sched: DiffusionSchedule):
        self.x0 = x0.data.copy()
        self.sched = sched

    def __call__(self, x_t: Tensor, condition: Tensor, t: int) -> Tensor:
        _check_t(t, self.sched)
        ab = self.sched.alpha_bar[t]
        eps = (x_t.data - np.sqrt(ab) * self.x0) / np.sqrt(1.0 - ab)
        return Tensor(eps.astype(x_t.dtype))


def time_embedding(t: int, dim: int, dtype=np.float32) -> Tensor:
    """Sinusoidal embedding of a step index."""
    half = dim // 2
    freqs = np.exp(-math.log(10000.0) * np.arange(half) / max(half - 1, 1))
    ang = t * freqs
    return Tensor(np.concatenate([np.sin(ang), np.cos(ang)]).astype(dtype))


class UNetDenoiser(Module):
    """Small conditional U-Net predicting eps from (x_t, condition, t).

    The condition is concatenated channel-wise; the sinusoidal time embedding
    enters additively as a per-channel bias at each scale.
    """

    def __init__(self, channels: int, base: int = 16, time_dim: int = 32,
                 rng: Rng | None = None, dtype=np.float32):
        super().__init__()
        rng = rng or Rng(0)
        self.channels = channels
        self.time_dim = time_dim
        c0, c1 = base, 2 * base
        self.embed = self._register("embed", Conv2d(2 * channels, c0, 3, rng, dtype=dtype))
        self.t0 = self._register("t0", Linear(time_dim, c0, rng, dtype=dtype))
        self.enc = self._register("enc", Conv2d(c0, c0, 3, rng, dtype=dtype))
        self.down = self._register("down", Conv2d(c0, c1, 2, rng, stride=2, padding=0, dtype=dtype))
        self.t1 = self._register("t1", Linear(time_dim, c1, rng, dtype=dtype))
        self.mid = self._register("mid", Conv2d(c1, c1, 3, rng, dtype=dtype))
        self.up = self._register("up", Conv2d(c1, c0, 3, rng, dtype=dtype))
        self.fuse = self._register("fuse", Conv2d(2 * c0, c0, 1, rng, dtype=dtype))
        self.dec = self._register("dec", Conv2d(c0, c0, 3, rng, dtype=dtype))
        self.out = self._register("out", Conv2d(c0, channels, 3, rng, init="zero", dtype=dtype))

    def __call__(self, x_t: Tensor, condition: Tensor, t: int) -> Tensor:
        if x_t.shape != condition.shape:
            raise DimensionError(f"x_t/condition shapes differ: {x_t.shape} vs {condition.shape}")
        temb = time_embedding(t, self.time_dim, dtype=x_t.dtype)
        h = self.embed(T.concat([x_t, condition], axis=0))
        h = h + self.t0(temb).reshape(-1, 1, 1)
        h = T.gelu(self.enc(T.gelu(h)))
        skip = h
        h = self.down(h)
        h = h + self.t1(temb).reshape(-1, 1, 1)
        h = T.gelu(self.mid(T.gelu(h)))
        h = self.up(T.upsample_nearest(h, 2))
        h = T.gelu(self.fuse(T.concat([h, skip], axis=0)))
        h = T.gelu(self.dec(h))
        return self.out(h)


# -- reverse process -----------------------------------------------------------------


def p_step(x_t: Tensor, condition: Tensor, t: int, denoiser, sched: DiffusionSchedule,
           rng: Rng, add_noise: bool = True) -> Tensor:
    """One ancestral reverse step x_t -> x_{t-1}; deterministic at t=1."""
    _check_t(t, sched)
    eps_hat = denoiser(x_t, condition, t)
    mu = (x_t.data - sched.beta[t] / np.sqrt(1.0 - sched.alpha_bar[t]) * eps_hat.data) \
        / np.sqrt(sched.alpha[t])
    if add_noise and t > 1:
        z = rng.normal(x_t.shape)
        mu = mu + np.sqrt(sched.sigma2[t]) * z
    return Tensor(mu.astype(x_t.dtype))


def sample(condition: Tensor, denoiser, sched: DiffusionSchedule, rng: Rng) -> Tensor:
    """Full reverse chain from pure noise; returns the residual estimate."""
    x = Tensor(rng.normal(condition.shape).astype(condition.dtype))
    for t in range(sched.T, 0, -1):
        x = p_step(x, condition, t, denoiser, sched, rng)
    return x


def train_step(pair, denoiser, optimizer: Adam, sched: DiffusionSchedule, rng: Rng,
               loss_kind: str = "l1") -> float:
    """One noise-prediction training step on the residual of (initial, gt)."""
    initial, gt = pair
    if initial.shape != gt.shape:
        raise DimensionError(f"pair shapes differ: {initial.shape} vs {gt.shape}")
    x0 = Tensor((gt.data - initial.data).astype(initial.dtype))
    t = rng.randint(1, sched.T)
    eps = Tensor(rng.normal(x0.shape).astype(x0.dtype))
    x_t = q_sample(x0, t, eps, sched)
    pred = denoiser(x_t, initial, t)
    loss = loss_dm(eps, pred, kind=loss_kind)
    optimizer.zero_grad()
    backward(loss)
    optimizer.step()
    return loss.item()


def frdam_adjust(initial: SubbandSet, ldfb, hdfb, sched: DiffusionSchedule, rng: Rng) -> Tensor:
    """Sample both residual chains and recombine: idwt2(initial + residuals).

    The two chains use independent deterministic streams split from the master
    seed, so they may run in either order (or concurrently) with identical
    results.
    """
    hf_cond = Tensor(np.concatenate([initial.lh.data, initial.hl.data, initial.hh.data], axis=0))
    hf_res = sample(hf_cond, hdfb, sched, rng.spawn(1))
    ll_res = sample(initial.ll, ldfb, sched, rng.spawn(2))
    c = initial.ll.shape[0]
    lh_r, hl_r, hh_r = (hf_res.data[i * c:(i + 1) * c] for i in range(3))
    adjusted = SubbandSet(
        ll=Tensor(initial.ll.data + ll_res.data),
        lh=Tensor(initial.lh.data + lh_r),
        hl=Tensor(initial.hl.data + hl_r),
        hh=Tensor(initial.hh.data + hh_r),
    )
    return idwt2(adjusted)
