"""Network building blocks for the two-branch enhancement net.

The high-frequency branch runs wide transformer blocks (WTB: spatial
self-attention + channel attention + FFN) over the three stacked detail
subbands; the low-frequency branch runs spatial-frequency fusion blocks
(SFFB: multi-scale spatial convolutions plus a learned per-bin map on the
Fourier amplitude/phase of the spatial embedding). A cross-frequency
conditioner (CFC) exchanges information between the branches at each encoder
scale and the bottleneck. The whole net is a parallel two-branch U-Net with
skip connections and a global residual, so zero-initialized output heads make
it the identity map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .errors import DimensionError
from .fourier import image_from_spectrum, spectrum_of
from .rng import Rng
from .tensor import Tensor
from .wavelet import SubbandSet


# -- parameter containers -------------------------------------------------------


class Module:
    """Lightweight parameter container with recursive named access."""

    def __init__(self):
        self._params: dict[str, Tensor] = {}
        self._modules: dict[str, Module] = {}

    def _register(self, name: str, obj):
        if isinstance(obj, Tensor):
            self._params[name] = obj
        elif isinstance(obj, Module):
            self._modules[name] = obj
        elif isinstance(obj, (list, tuple)):
            for i, o in enumerate(obj):
                self._register(f"{name}.{i}", o)
        else:
            raise TypeError(f"cannot register {type(obj)}")
        return obj

    def named_parameters(self, prefix: str = "") -> dict[str, Tensor]:
        out = {}
        for name, p in self._params.items():
            out[prefix + name] = p
        for name, m in self._modules.items():
            out.update(m.named_parameters(prefix + name + "."))
        return out

    def num_parameters(self) -> int:
        return sum(p.size for p in self.named_parameters().values())

    def load_state(self, state: dict[str, np.ndarray]):
        params = self.named_parameters()
        missing = set(params) - set(state)
        extra = set(state) - set(params)
        if missing or extra:
            raise KeyError(f"parameter table mismatch: missing={sorted(missing)}, extra={sorted(extra)}")
        for name, p in params.items():
            src = state[name]
            arr = src.data if isinstance(src, Tensor) else np.asarray(src)
            if arr.shape != p.data.shape:
                raise DimensionError(f"{name}: shape {arr.shape} != {p.data.shape}")
            p.data[...] = arr.astype(p.data.dtype)


class Conv2d(Module):
    def __init__(self, c_in, c_out, kernel, rng: Rng, stride=1, padding=None, groups=1,
                 bias=True, init="fanin", dtype=np.float32):
        super().__init__()
        self.stride = stride
        self.padding = kernel // 2 if padding is None else padding
        self.groups = groups
        cg = c_in // groups
        if init == "zero":
            w = np.zeros((c_out, cg, kernel, kernel))
        elif init == "identity":
            if kernel != 1 or groups != 1 or c_in != c_out:
                raise DimensionError("identity init needs square 1x1 ungrouped conv")
            w = np.eye(c_out).reshape(c_out, c_in, 1, 1)
        else:
            fan_in = cg * kernel * kernel
            w = rng.normal((c_out, cg, kernel, kernel)) * np.sqrt(1.0 / fan_in)
        self.weight = self._register("weight", Tensor(w.astype(dtype), requires_grad=True))
        self.bias = None
        if bias:
            self.bias = self._register("bias", Tensor(np.zeros(c_out, dtype=dtype), requires_grad=True))

    def __call__(self, x: Tensor) -> Tensor:
        return T.conv2d(x, self.weight, bias=self.bias, stride=self.stride,
                        padding=self.padding, groups=self.groups)


class Linear(Module):
    def __init__(self, c_in, c_out, rng: Rng, dtype=np.float32):
        super().__init__()
        w = rng.normal((c_out, c_in)) * np.sqrt(1.0 / c_in)
        self.weight = self._register("weight", Tensor(w.astype(dtype), requires_grad=True))
        self.bias = self._register("bias", Tensor(np.zeros(c_out, dtype=dtype), requires_grad=True))

    def __call__(self, x: Tensor) -> Tensor:
        # x: [c_in] vector.
        return T.matmul(self.weight, x.reshape(-1, 1)).reshape(-1) + self.bias


class ChannelNorm(Module):
    """Layer normalization over the channel axis of a [C,H,W] map."""

    def __init__(self, channels, dtype=np.float32, eps=1e-5):
        super().__init__()
        self.eps = eps
        self.gamma = self._register("gamma", Tensor(np.ones((channels, 1, 1), dtype=dtype), requires_grad=True))
        self.beta = self._register("beta", Tensor(np.zeros((channels, 1, 1), dtype=dtype), requires_grad=True))

    def __call__(self, x: Tensor) -> Tensor:
        return T.layer_norm(x, self.gamma, self.beta, axes=(0,), eps=self.eps)


# -- configs -------------------------------------------------------------------


@dataclass
class WTBConfig:
    channels: int
    heads: int = 4
    dw_kernels: tuple = (3, 5)
    ffn_expansion: int = 2

    def __post_init__(self):
        if self.channels % self.heads:
            raise DimensionError(f"channels {self.channels} not divisible by heads {self.heads}")
        if any(k % 2 == 0 for k in self.dw_kernels):
            raise DimensionError("depthwise kernel sizes must be odd")


@dataclass
class SFFBConfig:
    channels: int
    spatial_kernels: tuple = (1, 3, 5)

    def __post_init__(self):
        if any(k % 2 == 0 for k in self.spatial_kernels):
            raise DimensionError("spatial kernel sizes must be odd")


@dataclass
class WFINetConfig:
    scales: int = 2
    base_channels: int = 16
    blocks_per_scale: int = 1
    heads: int = 4
    dw_kernels: tuple = (3, 5)
    sdu_kernels: tuple = (1, 3, 5)
    ffn_expansion: int = 2
    image_channels: int = 3


# -- wide transformer block -------------------------------------------------------


class WTB(Module):
    """Spatial self-attention + squeeze-excite channel attention + FFN."""

    def __init__(self, cfg: WTBConfig, rng: Rng, dtype=np.float32):
        super().__init__()
        self.cfg = cfg
        c = cfg.channels
        self.norm1 = self._register("norm1", ChannelNorm(c, dtype))
        self.proj = self._register("proj", Conv2d(c, 4 * c, 1, rng, dtype=dtype))
        # Multi-scale depthwise stage: the 4c projected channels are chunked
        # across the kernel sizes, one depthwise conv per chunk.
        nk = len(cfg.dw_kernels)
        if (4 * c) % nk:
            raise DimensionError(f"4*channels={4*c} not divisible across {nk} depthwise kernels")
        chunk = 4 * c // nk
        self.dw = self._register("dw", [
            Conv2d(chunk, chunk, k, rng, groups=chunk, dtype=dtype) for k in cfg.dw_kernels
        ])
        self._chunk = chunk
        self.attn_out = self._register("attn_out", Conv2d(c, c, 1, rng, dtype=dtype))
        red = max(c // 4, 1)
        self.ca_down = self._register("ca_down", Conv2d(c, red, 1, rng, dtype=dtype))
        self.ca_up = self._register("ca_up", Conv2d(red, c, 1, rng, dtype=dtype))
        self.norm2 = self._register("norm2", ChannelNorm(c, dtype))
        e = cfg.ffn_expansion
        self.ffn_in = self._register("ffn_in", Conv2d(c, e * c, 1, rng, dtype=dtype))
        self.ffn_out = self._register("ffn_out", Conv2d(e * c, c, 1, rng, dtype=dtype))

    def _self_attention(self, q: Tensor, k: Tensor, v: Tensor) -> Tensor:
        c, h, w = q.shape
        heads = self.cfg.heads
        d = c // heads

        def to_tokens(t):
            return t.reshape(heads, d, h * w).transpose(0, 2, 1)  # [heads, hw, d]

        qt, kt, vt = to_tokens(q), to_tokens(k), to_tokens(v)
        scores = T.matmul(qt, kt.transpose(0, 2, 1)) * (1.0 / np.sqrt(d))
        attn = T.softmax(scores, axis=-1)
        out = T.matmul(attn, vt)  # [heads, hw, d]
        out = out.transpose(0, 2, 1).reshape(c, h, w)
        return self.attn_out(out)

    def _channel_attention(self, local: Tensor) -> Tensor:
        pooled = local.mean(axis=(1, 2), keepdims=True)  # [C,1,1]
        gate = T.sigmoid(self.ca_up(T.gelu(self.ca_down(pooled))))
        return gate * local

    def __call__(self, x: Tensor) -> Tensor:
        y = self.proj(self.norm1(x))
        chunks = T.split(y, len(self.cfg.dw_kernels), axis=0)
        y = T.concat([dw(ch) for dw, ch in zip(self.dw, chunks)], axis=0)
        q, k, v, local = T.split(y, 4, axis=0)
        t_hat = self._self_attention(q, k, v) + self._channel_attention(local) + x
        return self.ffn_out(T.gelu(self.ffn_in(self.norm2(t_hat)))) + t_hat


def wtb_forward(t_prev: Tensor, block: WTB) -> Tensor:
    return block(t_prev)


# -- spatial-frequency fusion block ------------------------------------------------


class SFFB(Module):
    """Multi-scale spatial unit plus learned map on Fourier amplitude/phase."""

    def __init__(self, cfg: SFFBConfig, rng: Rng, dtype=np.float32):
        super().__init__()
        self.cfg = cfg
        c = cfg.channels
        self.sdu = self._register("sdu", [
            Conv2d(c, c, k, rng, dtype=dtype) for k in cfg.spatial_kernels
        ])
        self.amp_convs = self._register("amp_convs", [
            Conv2d(c, c, 1, rng, dtype=dtype) for _ in range(2)
        ])
        self.phase_convs = self._register("phase_convs", [
            Conv2d(c, c, 1, rng, dtype=dtype) for _ in range(2)
        ])

    def init_fdu_identity(self):
        """Make the frequency unit a pass-through (for diagnostics/tests)."""
        for conv in self.amp_convs + self.phase_convs:
            eye = np.eye(conv.weight.shape[0], dtype=conv.weight.dtype)
            conv.weight.data[...] = eye.reshape(conv.weight.shape)
            conv.bias.data[...] = 0.0

    def __call__(self, x: Tensor) -> Tensor:
        f_s = self.sdu[0](x)
        for conv in self.sdu[1:]:
            f_s = f_s + conv(x)
        amp, phase = spectrum_of(f_s)
        for conv in self.amp_convs:
            amp = conv(amp)
        for conv in self.phase_convs:
            phase = conv(phase)
        f_f = image_from_spectrum(amp, phase)
        return f_s + f_f


def sffb_forward(x: Tensor, block: SFFB) -> Tensor:
    return block(x)


# -- cross-frequency conditioner ----------------------------------------------------


class CFC(Module):
    """Cross-attention between aggregated high-frequency and low-frequency maps."""

    def __init__(self, channels: int, rng: Rng, dtype=np.float32):
        super().__init__()
        self.channels = channels
        self.q = self._register("q", Conv2d(channels, channels, 1, rng, dtype=dtype))
        self.k = self._register("k", Conv2d(channels, channels, 1, rng, dtype=dtype))
        self.v_t = self._register("v_t", Conv2d(channels, channels, 1, rng, dtype=dtype))
        self.v_f = self._register("v_f", Conv2d(channels, channels, 1, rng, dtype=dtype))

    def __call__(self, t_in: Tensor, f_in: Tensor):
        if t_in.shape[0] != 3 or t_in.shape[1:] != f_in.shape:
            raise DimensionError(f"CFC shapes mismatch: {t_in.shape} vs {f_in.shape}")
        c, h, w = f_in.shape
        slots = T.split(t_in, 3, axis=0)
        hf_sum = (slots[0] + slots[1] + slots[2]).reshape(c, h, w)

        def tokens(t):  # [C,h,w] -> [hw, C]
            return t.reshape(c, h * w).transpose(1, 0)

        q = tokens(self.q(hf_sum))
        k = tokens(self.k(f_in))
        v_t = tokens(self.v_t(hf_sum))
        v_f = tokens(self.v_f(f_in))
        attn = T.softmax(T.matmul(q, k.transpose(1, 0)) * (1.0 / np.sqrt(c)), axis=-1)

        def maps(m):  # [hw, C] -> [C,h,w]
            return m.transpose(1, 0).reshape(c, h, w)

        t_map = maps(T.matmul(attn, v_t)).reshape(1, c, h, w)
        t_out = T.concat([t_map, t_map, t_map], axis=0)  # replicate across slots
        f_out = maps(T.matmul(attn, v_f))
        return t_out, f_out


def cfc_forward(t_in: Tensor, f_in: Tensor, block: CFC):
    return block(t_in, f_in)


# -- two-branch U-Net assembly ---------------------------------------------------


class _BranchScale(Module):
    """Block stack at one scale of one branch."""

    def __init__(self, make_block, count):
        super().__init__()
        self.blocks = self._register("blocks", [make_block() for _ in range(count)])

    def __call__(self, x: Tensor) -> Tensor:
        for b in self.blocks:
            x = b(x)
        return x


class WFINet(Module):
    """Parallel two-branch encoder-decoder over wavelet subbands.

    High-frequency branch channels are 3x the low-frequency channels at every
    scale so the per-coefficient maps line up for the cross-frequency
    conditioner. The output heads are zero-initialized: the net is the
    identity at initialization.
    """

    def __init__(self, cfg: WFINetConfig, rng: Rng, dtype=np.float32):
        super().__init__()
        self.cfg = cfg
        cimg = cfg.image_channels
        n = cfg.blocks_per_scale
        lf_ch = [cfg.base_channels * (2**s) for s in range(cfg.scales)]
        hf_ch = [3 * c for c in lf_ch]
        self.lf_ch = lf_ch
        self.hf_ch = hf_ch

        def wtb(c):
            return lambda: WTB(WTBConfig(c, cfg.heads, cfg.dw_kernels, cfg.ffn_expansion), rng, dtype)

        def sffb(c):
            return lambda: SFFB(SFFBConfig(c, cfg.sdu_kernels), rng, dtype)

        self.hf_embed = self._register("hf_embed", Conv2d(3 * cimg, hf_ch[0], 3, rng, dtype=dtype))
        self.lf_embed = self._register("lf_embed", Conv2d(cimg, lf_ch[0], 3, rng, dtype=dtype))

        enc = cfg.scales - 1
        self.hf_enc = self._register("hf_enc", [_BranchScale(wtb(hf_ch[s]), n) for s in range(enc)])
        self.lf_enc = self._register("lf_enc", [_BranchScale(sffb(lf_ch[s]), n) for s in range(enc)])
        self.cfc = self._register("cfc", [CFC(lf_ch[s], rng, dtype) for s in range(cfg.scales)])
        # 2x2 stride-2 convs halve extents exactly (3x3 stride-2 has no
        # integral output on even extents under the strict shape contract).
        self.hf_down = self._register("hf_down", [
            Conv2d(hf_ch[s], hf_ch[s + 1], 2, rng, stride=2, padding=0, dtype=dtype) for s in range(enc)
        ])
        self.lf_down = self._register("lf_down", [
            Conv2d(lf_ch[s], lf_ch[s + 1], 2, rng, stride=2, padding=0, dtype=dtype) for s in range(enc)
        ])
        self.hf_mid = self._register("hf_mid", _BranchScale(wtb(hf_ch[-1]), n))
        self.lf_mid = self._register("lf_mid", _BranchScale(sffb(lf_ch[-1]), n))
        self.hf_up = self._register("hf_up", [
            Conv2d(hf_ch[s + 1], hf_ch[s], 3, rng, dtype=dtype) for s in range(enc)
        ])
        self.lf_up = self._register("lf_up", [
            Conv2d(lf_ch[s + 1], lf_ch[s], 3, rng, dtype=dtype) for s in range(enc)
        ])
        self.hf_fuse = self._register("hf_fuse", [
            Conv2d(2 * hf_ch[s], hf_ch[s], 1, rng, dtype=dtype) for s in range(enc)
        ])
        self.lf_fuse = self._register("lf_fuse", [
            Conv2d(2 * lf_ch[s], lf_ch[s], 1, rng, dtype=dtype) for s in range(enc)
        ])
        self.hf_dec = self._register("hf_dec", [_BranchScale(wtb(hf_ch[s]), n) for s in range(enc)])
        self.lf_dec = self._register("lf_dec", [_BranchScale(sffb(lf_ch[s]), n) for s in range(enc)])
        # Residual tails: zero-initialized so the net starts as the identity.
        self.hf_head = self._register("hf_head", Conv2d(hf_ch[0], 3 * cimg, 3, rng, init="zero", dtype=dtype))
        self.lf_head = self._register("lf_head", Conv2d(lf_ch[0], cimg, 3, rng, init="zero", dtype=dtype))

    def _exchange(self, s: int, hf: Tensor, lf: Tensor):
        c = self.lf_ch[s]
        _, h, w = lf.shape
        t_in = hf.reshape(3, c, h, w)
        t_out, f_out = self.cfc[s](t_in, lf)
        return hf + t_out.reshape(3 * c, h, w), lf + f_out

    def __call__(self, subbands: SubbandSet) -> SubbandSet:
        hf_in = T.concat([subbands.lh, subbands.hl, subbands.hh], axis=0)
        lf_in = subbands.ll
        hf = self.hf_embed(hf_in)
        lf = self.lf_embed(lf_in)
        skips = []
        for s in range(self.cfg.scales - 1):
            hf = self.hf_enc[s](hf)
            lf = self.lf_enc[s](lf)
            hf, lf = self._exchange(s, hf, lf)
            skips.append((hf, lf))
            hf = self.hf_down[s](hf)
            lf = self.lf_down[s](lf)
        hf = self.hf_mid(hf)
        lf = self.lf_mid(lf)
        hf, lf = self._exchange(self.cfg.scales - 1, hf, lf)
        for s in reversed(range(self.cfg.scales - 1)):
            hf = self.hf_up[s](T.upsample_nearest(hf, 2))
            lf = self.lf_up[s](T.upsample_nearest(lf, 2))
            hf_skip, lf_skip = skips[s]
            hf = self.hf_fuse[s](T.concat([hf, hf_skip], axis=0))
            lf = self.lf_fuse[s](T.concat([lf, lf_skip], axis=0))
            hf = self.hf_dec[s](hf)
            lf = self.lf_dec[s](lf)
        hf_out = hf_in + self.hf_head(hf)
        lf_out = lf_in + self.lf_head(lf)
        cimg = self.cfg.image_channels
        lh, hl, hh = T.split(hf_out, 3, axis=0)
        return SubbandSet(ll=lf_out, lh=lh, hl=hl, hh=hh)


def wfi2_forward(subbands: SubbandSet, net: WFINet) -> SubbandSet:
    return net(subbands)
