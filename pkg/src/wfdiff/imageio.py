"""Binary PPM (P6) / PGM (P5) image I/O, 8-bit only.

Images are carried as [C,H,W] float tensors with values in [0,1]; the
interleaved byte layout of PPM is converted on the way in and out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FormatError
from .tensor import Tensor


@dataclass
class Image:
    """Planar [C,H,W] float image in [0,1], C in {1,3}."""

    tensor: Tensor
    colorspace: str = "linear"

    @property
    def channels(self) -> int:
        return self.tensor.shape[0]

    @property
    def height(self) -> int:
        return self.tensor.shape[1]

    @property
    def width(self) -> int:
        return self.tensor.shape[2]


def _read_token(f) -> bytes:
    """Next whitespace-delimited header token, skipping '#' comments."""
    tok = b""
    while True:
        ch = f.read(1)
        if ch == b"":
            raise FormatError("unexpected end of header")
        if ch == b"#":
            while ch not in (b"\n", b""):
                ch = f.read(1)
            continue
        if ch.isspace():
            if tok:
                return tok
            continue
        tok += ch


def read_ppm(path) -> Image:
    with open(path, "rb") as f:
        magic = f.read(2)
        if magic == b"P6":
            channels = 3
        elif magic == b"P5":
            channels = 1
        else:
            raise FormatError(f"unsupported magic {magic!r} (want P5 or P6)")
        try:
            width = int(_read_token(f))
            height = int(_read_token(f))
            maxval = int(_read_token(f))
        except ValueError as e:
            raise FormatError(f"malformed header: {e}") from None
        if width <= 0 or height <= 0:
            raise FormatError(f"bad extents {width}x{height}")
        if maxval != 255:
            raise FormatError(f"unsupported maxval {maxval} (only 255)")
        payload = f.read(width * height * channels)
    if len(payload) != width * height * channels:
        raise FormatError("truncated pixel payload")
    raw = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, channels)
    planar = np.ascontiguousarray(raw.transpose(2, 0, 1)).astype(np.float32) / 255.0
    return Image(Tensor(planar))


def write_ppm(img: Image, path) -> None:
    data = img.tensor.data
    if data.ndim != 3 or data.shape[0] not in (1, 3):
        raise FormatError(f"expected [C,H,W] with C in {{1,3}}, got {data.shape}")
    c, h, w = data.shape
    quant = np.clip(np.rint(np.clip(data, 0.0, 1.0) * 255.0), 0, 255).astype(np.uint8)
    interleaved = np.ascontiguousarray(quant.transpose(1, 2, 0))
    magic = b"P6" if c == 3 else b"P5"
    with open(path, "wb") as f:
        f.write(magic + b"\n" + f"{w} {h}\n255\n".encode())
        f.write(interleaved.tobytes())
