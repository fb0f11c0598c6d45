"""Benchmark: compiled convolution kernels vs the pure-numpy fallback.

Times the grouped conv2d forward and both adjoints on network-typical shapes
and prints per-call milliseconds plus the speedup. Run with

    python3 benchmarks/bench_conv.py [--repeats N]
"""

import argparse
import time

import numpy as np

from wfdiff import _convref, backend
from wfdiff.rng import Rng

CASES = [
    # (label, c_in, c_out, h, w, k, stride, pad, groups)
    ("embed 3x3", 9, 24, 32, 32, 3, 1, 1, 1),
    ("pointwise 1x1", 32, 128, 32, 32, 1, 1, 0, 1),
    ("depthwise 3x3", 64, 64, 32, 32, 3, 1, 1, 64),
    ("down 2x2 s2", 24, 48, 32, 32, 2, 2, 0, 1),
    ("mid 3x3", 48, 48, 16, 16, 3, 1, 1, 1),
]


def _time(fn, repeats):
    fn()  # warm up
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats * 1000.0


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeats", type=int, default=20)
    args = ap.parse_args()

    if not backend.HAS_COMPILED:
        print("compiled extension not available; nothing to compare")
        return

    rng = Rng(0)
    print(f"{'case':<18} {'op':<16} {'numpy ms':>10} {'compiled ms':>12} {'speedup':>8}")
    for label, c_in, c_out, h, w, k, stride, pad, groups in CASES:
        x = rng.normal((c_in, h, w)).astype(np.float32)
        wt = rng.normal((c_out, c_in // groups, k, k)).astype(np.float32)
        oh = (h + 2 * pad - k) // stride + 1
        ow = (w + 2 * pad - k) // stride + 1
        gy = rng.normal((c_out, oh, ow)).astype(np.float32)

        ops = {
            "forward": (
                lambda: _convref.conv2d_forward(x, wt, stride, pad, groups),
                lambda: backend._convkernels.conv2d_forward(x, wt, stride, pad, groups),
            ),
            "backward_input": (
                lambda: _convref.conv2d_backward_input(gy, wt, h, w, stride, pad, groups),
                lambda: backend._convkernels.conv2d_backward_input(gy, wt, h, w, stride, pad, groups),
            ),
            "backward_weight": (
                lambda: _convref.conv2d_backward_weight(gy, x, k, k, stride, pad, groups),
                lambda: backend._convkernels.conv2d_backward_weight(gy, x, k, k, stride, pad, groups),
            ),
        }
        for op, (ref_fn, fast_fn) in ops.items():
            ref = ref_fn()
            fast = fast_fn()
            err = float(np.max(np.abs(ref - fast)))
            assert err < 1e-3, f"{label}/{op}: backends disagree by {err}"
            t_ref = _time(ref_fn, args.repeats)
            t_fast = _time(fast_fn, args.repeats)
            print(f"{label:<18} {op:<16} {t_ref:>10.3f} {t_fast:>12.3f} {t_ref / t_fast:>7.1f}x")


if __name__ == "__main__":
    main()
