"""Training and enhancement pipelines tying the stages together.

Stage 1 fits the two-branch net on wavelet subbands with the detail-band and
amplitude losses. Stage 2 freezes stage 1 and fits two residual diffusion
denoisers (low band, stacked detail bands) on the remaining gap to ground
truth. Enhancement runs stage 1 and optionally the diffusion adjustment.
"""

from __future__ import annotations

import numpy as np

from .blocks import WFINet, WFINetConfig
from .config import RunConfig
from .diffusion import DiffusionSchedule, UNetDenoiser, frdam_adjust, make_schedule, train_step
from .imageio import Image
from .losses import loss_a, loss_h
from .optim import Adam
from .rng import Rng
from .tensor import Tensor, backward
from .wavelet import SubbandSet, crop_to, dwt2, idwt2, pad_even


def build_net(cfg: RunConfig, image_channels: int, rng: Rng) -> WFINet:
    n = cfg.net
    return WFINet(
        WFINetConfig(
            scales=n.scales,
            base_channels=n.base_channels,
            blocks_per_scale=n.blocks_per_scale,
            heads=n.heads,
            dw_kernels=tuple(n.dw_kernels),
            sdu_kernels=tuple(n.sdu_kernels),
            ffn_expansion=n.ffn_expansion,
            image_channels=image_channels,
        ),
        rng,
    )


def build_schedule(cfg: RunConfig) -> DiffusionSchedule:
    d = cfg.diffusion
    return make_schedule(d.steps, d.beta_start, d.beta_end)


def build_denoisers(cfg: RunConfig, image_channels: int, rng: Rng):
    d = cfg.diffusion
    ldfb = UNetDenoiser(image_channels, base=d.denoiser_base, time_dim=d.time_dim, rng=rng.spawn(11))
    hdfb = UNetDenoiser(3 * image_channels, base=d.denoiser_base, time_dim=d.time_dim, rng=rng.spawn(12))
    return ldfb, hdfb


def train_stage1(net: WFINet, degraded: Image, clean: Image, steps: int,
                 lr: float = 2e-3, w_h: float = 1.0, w_a: float = 0.1,
                 log_every: int = 0):
    """Overfit the enhancement net on one degraded/clean pair; returns losses."""
    deg_t, _ = pad_even(degraded.tensor)
    gt_t, _ = pad_even(clean.tensor)
    inp = dwt2(deg_t)
    gt = dwt2(gt_t)
    opt = Adam(net.named_parameters(), lr=lr)
    history = []
    for step in range(steps):
        pred = net(inp)
        loss = w_h * loss_h(pred, gt) + w_a * loss_a(pred.ll, gt.ll)
        opt.zero_grad()
        backward(loss)
        opt.step()
        history.append(loss.item())
        if log_every and (step % log_every == 0 or step == steps - 1):
            print(f"stage1 step {step}: loss {history[-1]:.6f}", flush=True)
    return history


def stage1_outputs(net: WFINet, degraded: Image) -> SubbandSet:
    """Initial enhanced subbands for a degraded image (graph detached)."""
    deg_t, _ = pad_even(degraded.tensor)
    pred = net(dwt2(deg_t))
    return SubbandSet(*(Tensor(b.data.copy()) for b in (pred.ll, pred.lh, pred.hl, pred.hh)))


def _stack_hf(s: SubbandSet) -> Tensor:
    return Tensor(np.concatenate([s.lh.data, s.hl.data, s.hh.data], axis=0))


def train_stage2(ldfb, hdfb, initial: SubbandSet, gt: SubbandSet,
                 sched: DiffusionSchedule, steps: int, rng: Rng,
                 lr: float = 2e-3, loss_kind: str = "l1", log_every: int = 0):
    """Train both residual denoisers; returns (ll_losses, hf_losses)."""
    opt_l = Adam(ldfb.named_parameters(), lr=lr)
    opt_h = Adam(hdfb.named_parameters(), lr=lr)
    ll_pair = (initial.ll, gt.ll)
    hf_pair = (_stack_hf(initial), _stack_hf(gt))
    rng_l, rng_h = rng.spawn(21), rng.spawn(22)
    ll_hist, hf_hist = [], []
    for step in range(steps):
        ll_hist.append(train_step(ll_pair, ldfb, opt_l, sched, rng_l, loss_kind))
        hf_hist.append(train_step(hf_pair, hdfb, opt_h, sched, rng_h, loss_kind))
        if log_every and (step % log_every == 0 or step == steps - 1):
            print(f"stage2 step {step}: ll {ll_hist[-1]:.6f} hf {hf_hist[-1]:.6f}", flush=True)
    return ll_hist, hf_hist


def enhance(net: WFINet, img: Image, ldfb=None, hdfb=None,
            sched: DiffusionSchedule | None = None, rng: Rng | None = None) -> Image:
    """Stage-1 enhancement, plus diffusion adjustment when denoisers are given."""
    padded, extents = pad_even(img.tensor)
    initial = net(dwt2(padded))
    if ldfb is not None and hdfb is not None:
        out = frdam_adjust(initial, ldfb, hdfb, sched, rng or Rng(0))
    else:
        out = idwt2(initial)
    return Image(crop_to(Tensor(out.data), extents))
