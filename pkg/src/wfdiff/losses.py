"""Training objectives: high-frequency, amplitude, and diffusion losses.

All reductions are means over elements so magnitudes are independent of
resolution. The diffusion loss defaults to mean L1 (consistent with the
amplitude loss being L1); ``kind="l2"`` switches to mean squared error.
"""

from __future__ import annotations

from . import tensor as T
from .errors import DimensionError
from .fourier import fft2, spectrum_of
from .tensor import Tensor
from .wavelet import SubbandSet


def _check_shapes(a: Tensor, b: Tensor, what: str):
    if a.shape != b.shape:
        raise DimensionError(f"{what}: shapes differ {a.shape} vs {b.shape}")


def loss_h(pred: SubbandSet, gt: SubbandSet) -> Tensor:
    """Sum over the three detail bands of the RMS difference (ll excluded)."""
    total = None
    for name in ("lh", "hl", "hh"):
        p = getattr(pred, name)
        g = getattr(gt, name)
        _check_shapes(p, g, f"loss_h[{name}]")
        term = T.sqrt(T.square(p - g).mean())
        total = term if total is None else total + term
    return total


def loss_a(pred_ll: Tensor, gt_ll: Tensor) -> Tensor:
    """Mean L1 distance between Fourier amplitudes of the two low bands.

    Phase is unconstrained, so the loss is invariant under circular spatial
    shifts of either argument.
    """
    _check_shapes(pred_ll, gt_ll, "loss_a")
    amp_pred, _ = spectrum_of(pred_ll)
    amp_gt = fft2(gt_ll).amplitude
    return T.absolute(amp_pred - amp_gt).mean()


def loss_dm(eps_true: Tensor, eps_pred: Tensor, kind: str = "l1") -> Tensor:
    """Noise prediction loss: mean |eps - eps_hat| (or MSE for kind="l2")."""
    _check_shapes(eps_true, eps_pred, "loss_dm")
    diff = eps_pred - eps_true
    if kind == "l1":
        return T.absolute(diff).mean()
    if kind == "l2":
        return T.square(diff).mean()
    raise ValueError(f"unknown loss kind {kind!r}")
