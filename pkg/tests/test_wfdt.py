"""WFDT tensor format and checkpoint archives: bit-exact round-trips."""

import numpy as np
import pytest

from wfdiff.checkpoint import load_checkpoint, save_checkpoint
from wfdiff.errors import FormatError
from wfdiff.rng import Rng
from wfdiff.tensor import Tensor
from wfdiff.wfdt import dumps_wfdt, load_wfdt, loads_wfdt, save_wfdt


def test_roundtrip_bit_exact(tmp_path):
    arr = Rng(0).normal((3, 4, 5)).astype(np.float32)
    p = tmp_path / "t.wfdt"
    save_wfdt(p, Tensor(arr))
    back = load_wfdt(p).data
    assert back.dtype == np.float32
    assert np.array_equal(back.view(np.uint32), arr.view(np.uint32))


def test_dumps_loads_inverse():
    arr = Rng(1).normal((7,)).astype(np.float32)
    assert np.array_equal(loads_wfdt(dumps_wfdt(arr)).data, arr)


def test_rank_one_and_high_rank():
    for shape in ((1,), (6,), (2, 3, 4, 5)):
        arr = Rng(2).normal(shape).astype(np.float32)
        assert loads_wfdt(dumps_wfdt(arr)).data.shape == shape


def test_rejected_blobs():
    good = dumps_wfdt(np.ones((2, 2), dtype=np.float32))
    with pytest.raises(FormatError):
        loads_wfdt(b"XXXX" + good[4:])            # bad magic
    with pytest.raises(FormatError):
        loads_wfdt(good[:-1])                      # truncated payload
    with pytest.raises(FormatError):
        loads_wfdt(good + b"\x00")                 # trailing bytes
    with pytest.raises(FormatError):
        dumps_wfdt(np.ones((2, 2), dtype=np.float64))


def test_checkpoint_roundtrip_bit_exact(tmp_path):
    rng = Rng(3)
    params = {
        "a.weight": Tensor(rng.normal((4, 3, 3, 3)).astype(np.float32)),
        "a.bias": Tensor(rng.normal((4,)).astype(np.float32)),
        "b": Tensor(rng.normal((2, 2)).astype(np.float32)),
    }
    config = {"steps": 50, "nested": {"x": [1, 2, 3]}, "name": "tiny"}
    p = tmp_path / "ck.wfck"
    save_checkpoint(p, params, config)
    loaded, meta = load_checkpoint(p)
    assert meta == config
    assert set(loaded) == set(params)
    for k, v in params.items():
        assert np.array_equal(loaded[k].view(np.uint32), v.data.view(np.uint32))


def test_checkpoint_save_is_deterministic(tmp_path):
    params = {"w": Tensor(np.arange(6, dtype=np.float32).reshape(2, 3))}
    p1, p2 = tmp_path / "a", tmp_path / "b"
    save_checkpoint(p1, params, {"k": 1})
    save_checkpoint(p2, params, {"k": 1})
    assert p1.read_bytes() == p2.read_bytes()


def test_checkpoint_rejects_garbage(tmp_path):
    p = tmp_path / "bad"
    p.write_bytes(b"not a checkpoint")
    with pytest.raises(FormatError):
        load_checkpoint(p)
