"""Frequency-domain underwater image enhancement toolkit.

Haar wavelet decomposition, unitary Fourier amplitude/phase factorization and
swap diagnostics, a two-branch enhancement network over wavelet subbands, and
residual diffusion adjustment of the enhanced bands — all on a small
numpy-backed autodiff tensor core with optional compiled convolution kernels.
"""

from .backend import HAS_COMPILED, backend_name
from .diffusion import (
    DiffusionSchedule,
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
)
from .errors import DimensionError, FormatError, GraphError, SymmetryError
from .fourier import Spectrum, fft2, ifft2, recombine
from .freq_analysis import (
    MetricReport,
    SwapStrategy,
    analyze_corpus,
    make_colorcast_corpus,
    psnr,
    ssim,
    swap,
)
from .imageio import Image, read_ppm, write_ppm
from .losses import loss_a, loss_dm, loss_h
from .rng import Rng
from .tensor import Tensor, backward, grad_check
from .wavelet import SubbandSet, dwt2, idwt2, pad_even
from .wfdt import load_wfdt, save_wfdt

__version__ = "0.1.0"
