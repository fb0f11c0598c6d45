"""Minimal N-dimensional tensor with reverse-mode differentiation.

Tensors wrap contiguous numpy arrays (float32 by default, float64 supported
for high-precision gradient checks). Operations record a dynamic graph;
``backward`` on a scalar populates ``grad`` on every reachable tensor that
``requires_grad``. Only the operations needed by the enhancement network are
differentiable. Reductions accumulate in float64 before casting back.
"""

from __future__ import annotations

import numpy as np

from . import backend
from .errors import DimensionError, GraphError

_FLOAT_DTYPES = (np.dtype(np.float32), np.dtype(np.float64))


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward_fn")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        arr = np.asarray(data)
        if dtype is None:
            dtype = arr.dtype if arr.dtype in _FLOAT_DTYPES else np.float32
        # reshape preserves 0-d shapes, which ascontiguousarray promotes to 1-d
        arr = np.ascontiguousarray(arr, dtype=dtype).reshape(arr.shape)
        if not np.all(np.isfinite(arr)):
            raise ValueError("tensor values must be finite")
        self.data = arr
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = ()
        self._backward_fn = None

    # -- basics -----------------------------------------------------------

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def size(self):
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}, requires_grad={self.requires_grad})"

    # -- operator sugar ----------------------------------------------------

    def __add__(self, other):
        return add(self, _as_tensor(other, self.dtype))

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, _as_tensor(other, self.dtype))

    def __rsub__(self, other):
        return sub(_as_tensor(other, self.dtype), self)

    def __mul__(self, other):
        return mul(self, _as_tensor(other, self.dtype))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, _as_tensor(other, self.dtype))

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    # -- method sugar --------------------------------------------------------

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis, keepdims)

    def mean(self, axis=None, keepdims=False):
        return tmean(self, axis, keepdims)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def transpose(self, *axes):
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return transpose(self, axes)


def _as_tensor(x, dtype) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=dtype))


def _make(data: np.ndarray, parents, backward_fn) -> Tensor:
    """Graph-internal constructor: no finiteness check, prunes dead branches."""
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    out.requires_grad = any(p.requires_grad for p in parents)
    out._parents = tuple(parents) if out.requires_grad else ()
    out._backward_fn = backward_fn if out.requires_grad else None
    return out


def _accum(t: Tensor, g: np.ndarray):
    if not t.requires_grad:
        return
    g = np.ascontiguousarray(g, dtype=t.data.dtype)
    if t.grad is None:
        t.grad = g.copy()
    else:
        t.grad = t.grad + g


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    """Reduce a broadcast gradient back to the operand's shape."""
    extra = g.ndim - len(shape)
    if extra:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, (gs, s) in enumerate(zip(g.shape, shape)) if s == 1 and gs != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def backward(loss: Tensor):
    """Reverse-mode sweep from a scalar loss; populates .grad on parameters."""
    if loss.size != 1:
        raise DimensionError("backward requires a scalar loss")
    if not loss.requires_grad:
        raise GraphError("loss is detached from any recorded graph")
    order = []
    seen = set()
    stack = [(loss, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))
    loss.grad = np.ones_like(loss.data)
    for node in reversed(order):
        if node._backward_fn is not None and node.grad is not None:
            node._backward_fn(node.grad)


# -- elementwise ------------------------------------------------------------


def add(a: Tensor, b: Tensor) -> Tensor:
    data = a.data + b.data

    def bw(g):
        _accum(a, _unbroadcast(g, a.shape))
        _accum(b, _unbroadcast(g, b.shape))

    return _make(data, (a, b), bw)


def sub(a: Tensor, b: Tensor) -> Tensor:
    data = a.data - b.data

    def bw(g):
        _accum(a, _unbroadcast(g, a.shape))
        _accum(b, _unbroadcast(-g, b.shape))

    return _make(data, (a, b), bw)


def mul(a: Tensor, b: Tensor) -> Tensor:
    data = a.data * b.data

    def bw(g):
        _accum(a, _unbroadcast(g * b.data, a.shape))
        _accum(b, _unbroadcast(g * a.data, b.shape))

    return _make(data, (a, b), bw)


def div(a: Tensor, b: Tensor) -> Tensor:
    data = a.data / b.data

    def bw(g):
        _accum(a, _unbroadcast(g / b.data, a.shape))
        _accum(b, _unbroadcast(-g * a.data / (b.data * b.data), b.shape))

    return _make(data, (a, b), bw)


def neg(a: Tensor) -> Tensor:
    return _make(-a.data, (a,), lambda g: _accum(a, -g))


def square(a: Tensor) -> Tensor:
    return _make(a.data * a.data, (a,), lambda g: _accum(a, 2.0 * a.data * g))


def sqrt(a: Tensor) -> Tensor:
    data = np.sqrt(a.data)

    def bw(g):
        _accum(a, g * (0.5 / np.maximum(data, np.finfo(data.dtype).tiny)))

    return _make(data, (a,), bw)


def exp(a: Tensor) -> Tensor:
    data = np.exp(a.data)
    return _make(data, (a,), lambda g: _accum(a, g * data))


def absolute(a: Tensor) -> Tensor:
    """|x|; subgradient 0 at 0."""
    return _make(np.abs(a.data), (a,), lambda g: _accum(a, g * np.sign(a.data)))


def sigmoid(a: Tensor) -> Tensor:
    data = 1.0 / (1.0 + np.exp(-a.data))
    return _make(data, (a,), lambda g: _accum(a, g * data * (1.0 - data)))


_GELU_C = 0.7978845608028654  # sqrt(2/pi)


def gelu(a: Tensor) -> Tensor:
    """GELU, tanh approximation (keeps the op dependency-free and smooth)."""
    x = a.data
    inner = _GELU_C * (x + 0.044715 * x**3)
    t = np.tanh(inner)
    data = (0.5 * x * (1.0 + t)).astype(x.dtype)

    def bw(g):
        d = 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * _GELU_C * (1.0 + 3 * 0.044715 * x * x)
        _accum(a, g * d)

    return _make(data, (a,), bw)


# -- reductions --------------------------------------------------------------


def tsum(a: Tensor, axis=None, keepdims=False) -> Tensor:
    data = a.data.sum(axis=axis, keepdims=keepdims, dtype=np.float64).astype(a.dtype)

    def bw(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        _accum(a, np.broadcast_to(g, a.shape))

    return _make(data, (a,), bw)


def tmean(a: Tensor, axis=None, keepdims=False) -> Tensor:
    n = a.size if axis is None else np.prod([a.shape[i] for i in np.atleast_1d(axis)])
    data = a.data.mean(axis=axis, keepdims=keepdims, dtype=np.float64).astype(a.dtype)

    def bw(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        _accum(a, np.broadcast_to(g, a.shape) / n)

    return _make(data, (a,), bw)


# -- shape manipulation -------------------------------------------------------


def reshape(a: Tensor, shape) -> Tensor:
    data = a.data.reshape(shape)
    return _make(data, (a,), lambda g: _accum(a, g.reshape(a.shape)))


def transpose(a: Tensor, axes) -> Tensor:
    axes = tuple(axes)
    inv = tuple(np.argsort(axes))
    return _make(np.ascontiguousarray(a.data.transpose(axes)), (a,), lambda g: _accum(a, g.transpose(inv)))


def concat(tensors, axis=0) -> Tensor:
    tensors = list(tensors)
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def bw(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(lo, hi)
            _accum(t, g[tuple(sl)])

    return _make(data, tensors, bw)


def split(a: Tensor, sections: int, axis=0):
    """Split into equal parts along an axis; inverse of concat."""
    if a.shape[axis] % sections:
        raise DimensionError(f"extent {a.shape[axis]} not divisible into {sections} parts")
    step = a.shape[axis] // sections
    outs = []
    for k in range(sections):
        sl = [slice(None)] * a.data.ndim
        sl[axis] = slice(k * step, (k + 1) * step)
        sl = tuple(sl)

        def bw(g, sl=sl):
            big = np.zeros(a.shape, dtype=g.dtype)
            big[sl] = g
            _accum(a, big)

        outs.append(_make(np.ascontiguousarray(a.data[sl]), (a,), bw))
    return outs


def upsample_nearest(a: Tensor, factor: int) -> Tensor:
    """Nearest-neighbour upsampling of a [C,H,W] tensor."""
    c, h, w = a.shape
    data = np.repeat(np.repeat(a.data, factor, axis=1), factor, axis=2)

    def bw(g):
        _accum(a, g.reshape(c, h, factor, w, factor).sum(axis=(2, 4)))

    return _make(data, (a,), bw)


# -- linear / convolutional ----------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape[-1] != b.shape[-2]:
        raise DimensionError(f"matmul inner extents differ: {a.shape} x {b.shape}")
    if a.shape[:-2] != b.shape[:-2]:
        raise DimensionError("matmul batch extents must match")
    data = np.matmul(a.data, b.data)

    def bw(g):
        _accum(a, np.matmul(g, np.swapaxes(b.data, -1, -2)))
        _accum(b, np.matmul(np.swapaxes(a.data, -1, -2), g))

    return _make(data, (a, b), bw)


def conv2d(x: Tensor, w: Tensor, bias: Tensor | None = None, stride: int = 1,
           padding: int = 0, groups: int = 1) -> Tensor:
    """Grouped 2D cross-correlation of x[C_in,H,W] with w[C_out,C_in/g,kh,kw]."""
    c_in, h, wd = x.shape
    c_out, cg, kh, kw = w.shape
    if c_in % groups or c_out % groups or cg != c_in // groups:
        raise DimensionError(f"channels {c_in}->{c_out} not compatible with groups={groups}")
    if (h + 2 * padding - kh) % stride or (wd + 2 * padding - kw) % stride:
        raise DimensionError("non-integral convolution output extent")
    if h + 2 * padding < kh or wd + 2 * padding < kw:
        raise DimensionError("kernel larger than padded input")
    data = backend.conv2d_forward(x.data, w.data, stride, padding, groups)
    if bias is not None:
        data = data + bias.data[:, None, None]

    def bw(g):
        g = np.ascontiguousarray(g)
        _accum(x, backend.conv2d_backward_input(g, w.data, h, wd, stride, padding, groups))
        _accum(w, backend.conv2d_backward_weight(g, x.data, kh, kw, stride, padding, groups))
        if bias is not None:
            _accum(bias, g.sum(axis=(1, 2)))

    parents = (x, w) if bias is None else (x, w, bias)
    return _make(data, parents, bw)


def depthwise_conv2d(x: Tensor, w: Tensor, bias: Tensor | None = None,
                     stride: int = 1, padding: int = 0) -> Tensor:
    """conv2d with one group per channel; w has shape [C,1,kh,kw]."""
    return conv2d(x, w, bias=bias, stride=stride, padding=padding, groups=x.shape[0])


# -- normalization / attention helpers -----------------------------------------


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    z = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(z)
    data = e / e.sum(axis=axis, keepdims=True, dtype=np.float64).astype(x.dtype)

    def bw(g):
        dot = (g * data).sum(axis=axis, keepdims=True)
        _accum(x, data * (g - dot))

    return _make(data.astype(x.dtype), (x,), bw)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, axes=(0,), eps: float = 1e-5) -> Tensor:
    """Normalize over `axes` to zero mean / unit variance, then affine.

    gamma/beta must broadcast against x (e.g. shape [C,1,1] for channel
    normalization of a [C,H,W] map).
    """
    axes = tuple(np.atleast_1d(axes))
    m = x.data.mean(axis=axes, keepdims=True, dtype=np.float64).astype(x.dtype)
    v = x.data.var(axis=axes, keepdims=True, dtype=np.float64).astype(x.dtype)
    inv = 1.0 / np.sqrt(v + eps)
    xhat = (x.data - m) * inv
    data = gamma.data * xhat + beta.data

    def bw(g):
        gxh = g * gamma.data
        gx = inv * (gxh - gxh.mean(axis=axes, keepdims=True)
                    - xhat * (gxh * xhat).mean(axis=axes, keepdims=True))
        _accum(x, gx)
        _accum(gamma, _unbroadcast(g * xhat, gamma.shape))
        _accum(beta, _unbroadcast(g, beta.shape))

    return _make(data, (x, gamma, beta), bw)


# -- construction helpers -------------------------------------------------------


def zeros(shape, dtype=np.float32, requires_grad=False) -> Tensor:
    return Tensor(np.zeros(shape, dtype=dtype), requires_grad=requires_grad)


def ones(shape, dtype=np.float32, requires_grad=False) -> Tensor:
    return Tensor(np.ones(shape, dtype=dtype), requires_grad=requires_grad)


def randn(rng, shape, scale=1.0, dtype=np.float32, requires_grad=False) -> Tensor:
    return Tensor((rng.normal(shape) * scale).astype(dtype), requires_grad=requires_grad)


# -- gradient verification -------------------------------------------------------


class GradCheckReport:
    """Per-element relative errors of analytic vs central-difference gradients."""

    def __init__(self, analytic, numeric, rel_errors, tol):
        self.analytic = analytic
        self.numeric = numeric
        self.rel_errors = rel_errors
        self.max_rel_error = float(rel_errors.max()) if rel_errors.size else 0.0
        self.tol = tol
        self.passed = bool(self.max_rel_error < tol)

    def __repr__(self):
        status = "PASS" if self.passed else "FAIL"
        return f"GradCheckReport({status}, max_rel_error={self.max_rel_error:.3e}, tol={self.tol:g})"


def grad_check(f, x: Tensor, h: float = 1e-3, tol: float = 1e-3) -> GradCheckReport:
    """Compare analytic gradients of scalar-valued f against central differences.

    f must be deterministic. Known limitation: functions with kinks (e.g. |x|)
    fail when an element sits within h of the kink, because the finite
    difference straddles it.
    """
    x = Tensor(x.data.copy(), requires_grad=True, dtype=x.dtype)
    y = f(x)
    backward(y)
    analytic = x.grad.copy()

    numeric = np.zeros_like(x.data)
    flat = x.data.reshape(-1)
    nflat = numeric.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = f(Tensor(x.data.copy())).item()
        flat[i] = orig - h
        fm = f(Tensor(x.data.copy())).item()
        flat[i] = orig
        nflat[i] = (fp - fm) / (2.0 * h)

    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-6)
    rel = np.abs(analytic - numeric) / denom
    return GradCheckReport(analytic, numeric, rel, tol)
