"""WFDT tensor file format.

Layout: magic ``WFDT``, u32 version (=1), u8 dtype code (0 = float32),
u32 ndim, ndim x u64 extents, then the row-major little-endian payload.
Round-trips are bit-exact.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FormatError
from .tensor import Tensor

MAGIC = b"WFDT"
VERSION = 1
_DTYPE_F32 = 0


def save_wfdt(path, tensor) -> None:
    arr = tensor.data if isinstance(tensor, Tensor) else np.asarray(tensor)
    if arr.dtype != np.float32:
        arr = arr.astype(np.float32)
    arr = np.ascontiguousarray(arr)
    with open(path, "wb") as f:
        f.write(dumps_wfdt(arr))


def dumps_wfdt(arr: np.ndarray) -> bytes:
    if arr.dtype != np.float32:
        raise FormatError("WFDT stores float32 payloads only")
    head = MAGIC + struct.pack("<IBI", VERSION, _DTYPE_F32, arr.ndim)
    head += struct.pack(f"<{arr.ndim}Q", *arr.shape)
    return head + arr.astype("<f4", copy=False).tobytes(order="C")


def load_wfdt(path) -> Tensor:
    with open(path, "rb") as f:
        return loads_wfdt(f.read())


def loads_wfdt(blob: bytes) -> Tensor:
    arr, used = _parse(blob)
    if used != len(blob):
        raise FormatError("trailing bytes after WFDT payload")
    return Tensor(arr)


def _parse(blob: bytes, offset: int = 0):
    """Parse one WFDT record starting at offset; returns (array, end offset)."""
    if blob[offset : offset + 4] != MAGIC:
        raise FormatError("not a WFDT file (bad magic)")
    offset += 4
    if len(blob) < offset + 9:
        raise FormatError("truncated WFDT header")
    version, dtype_code, ndim = struct.unpack_from("<IBI", blob, offset)
    offset += 9
    if version != VERSION:
        raise FormatError(f"unsupported WFDT version {version}")
    if dtype_code != _DTYPE_F32:
        raise FormatError(f"unsupported WFDT dtype code {dtype_code}")
    if len(blob) < offset + 8 * ndim:
        raise FormatError("truncated WFDT extents")
    shape = struct.unpack_from(f"<{ndim}Q", blob, offset)
    offset += 8 * ndim
    count = int(np.prod(shape)) if ndim else 1
    nbytes = 4 * count
    if len(blob) < offset + nbytes:
        raise FormatError("truncated WFDT payload")
    arr = np.frombuffer(blob, dtype="<f4", count=count, offset=offset).reshape(shape)
    return np.ascontiguousarray(arr), offset + nbytes
