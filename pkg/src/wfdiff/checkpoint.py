"""Checkpoint archive: a JSON config header plus named WFDT tensor records.

Layout: magic ``WFCK``, u32 version (=1), u32 header length, UTF-8 JSON
header, u32 entry count, then per entry u32 name length, name bytes, and one
WFDT tensor record. Round-trips are bit-exact.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from . import wfdt
from .errors import FormatError
from .tensor import Tensor

MAGIC = b"WFCK"
VERSION = 1


def save_checkpoint(path, params: dict, config: dict) -> None:
    header = json.dumps(config, sort_keys=True).encode()
    with open(path, "wb") as f:
        f.write(MAGIC + struct.pack("<II", VERSION, len(header)) + header)
        f.write(struct.pack("<I", len(params)))
        for name in sorted(params):
            p = params[name]
            arr = p.data if isinstance(p, Tensor) else np.asarray(p, dtype=np.float32)
            name_b = name.encode()
            f.write(struct.pack("<I", len(name_b)) + name_b)
            f.write(wfdt.dumps_wfdt(np.ascontiguousarray(arr, dtype=np.float32)))


def load_checkpoint(path):
    """Returns (params: dict[str, np.ndarray float32], config: dict)."""
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:4] != MAGIC:
        raise FormatError("not a checkpoint file (bad magic)")
    version, hlen = struct.unpack_from("<II", blob, 4)
    if version != VERSION:
        raise FormatError(f"unsupported checkpoint version {version}")
    off = 12
    try:
        config = json.loads(blob[off : off + hlen].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError(f"bad checkpoint config header: {e}") from None
    off += hlen
    (count,) = struct.unpack_from("<I", blob, off)
    off += 4
    params = {}
    for _ in range(count):
        (nlen,) = struct.unpack_from("<I", blob, off)
        off += 4
        name = blob[off : off + nlen].decode()
        off += nlen
        arr, off = wfdt._parse(blob, off)
        params[name] = arr
    if off != len(blob):
        raise FormatError("trailing bytes after checkpoint payload")
    return params, config
