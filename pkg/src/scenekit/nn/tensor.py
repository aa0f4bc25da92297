"""Reverse-mode autodiff on numpy arrays.

Storage is float32 by default; explicit reductions (sum/mean/variance and
gradient un-broadcasting) accumulate in float64 before casting back. The
whole graph can run in float64 by feeding float64 tensors, which is what
gradient checking does.
"""

from __future__ import annotations

import numpy as np

DEFAULT_DTYPE = np.float32


def _as_array(data, dtype=None):
    arr = np.asarray(data)
    if arr.dtype not in (np.float32, np.float64):
        arr = arr.astype(dtype or DEFAULT_DTYPE)
    if dtype is not None and arr.dtype != dtype:
        arr = arr.astype(dtype)
    return arr


def _reduce_to_shape(grad, shape):
    """Sum `grad` down to `shape`, undoing numpy broadcasting (f64 accumulation)."""
    if grad.shape == tuple(shape):
        return grad
    out_dtype = grad.dtype
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)), dtype=np.float64)
    keep = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if keep:
        grad = grad.sum(axis=keep, keepdims=True, dtype=np.float64)
    return grad.astype(out_dtype, copy=False).reshape(shape)


class Tensor:
    """A numpy array plus the closure that routes gradients to its parents."""

    __slots__ = ("data", "grad", "requires_grad", "_backward", "_parents")

    def __init__(self, data, requires_grad=False, _parents=(), _backward=None):
        self.data = _as_array(data)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents = _parents
        self._backward = _backward

    # -- introspection ----------------------------------------------------
    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}, requires_grad={self.requires_grad})"

    def item(self):
        return float(self.data)

    def detach(self):
        return Tensor(self.data)

    # -- graph mechanics ---------------------------------------------------
    def _accumulate(self, grad):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += grad.astype(self.data.dtype, copy=False)

    def zero_grad(self):
        self.grad = None

    def backward(self, grad=None):
        if grad is None:
            if self.data.size != 1:
                raise ValueError("backward() without an explicit gradient needs a scalar output")
            grad = np.ones_like(self.data)
        topo, seen = [], set()
        stack = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self._accumulate(np.asarray(grad, dtype=self.data.dtype))
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        other = other if isinstance(other, Tensor) else Tensor(_as_array(other, self.dtype))
        out = Tensor(self.data + other.data, self.requires_grad or other.requires_grad,
                     (self, other))

        def bw(g):
            if self.requires_grad:
                self._accumulate(_reduce_to_shape(g, self.shape))
            if other.requires_grad:
                other._accumulate(_reduce_to_shape(g, other.shape))
        out._backward = bw
        return out

    __radd__ = __add__

    def __neg__(self):
        out = Tensor(-self.data, self.requires_grad, (self,))

        def bw(g):
            if self.requires_grad:
                self._accumulate(-g)
        out._backward = bw
        return out

    def __sub__(self, other):
        other = other if isinstance(other, Tensor) else Tensor(_as_array(other, self.dtype))
        out = Tensor(self.data - other.data, self.requires_grad or other.requires_grad,
                     (self, other))

        def bw(g):
            if self.requires_grad:
                self._accumulate(_reduce_to_shape(g, self.shape))
            if other.requires_grad:
                other._accumulate(_reduce_to_shape(-g, other.shape))
        out._backward = bw
        return out

    def __rsub__(self, other):
        return Tensor(_as_array(other, self.dtype)) - self

    def __mul__(self, other):
        other = other if isinstance(other, Tensor) else Tensor(_as_array(other, self.dtype))
        out = Tensor(self.data * other.data, self.requires_grad or other.requires_grad,
                     (self, other))

        def bw(g):
            if self.requires_grad:
                self._accumulate(_reduce_to_shape(g * other.data, self.shape))
            if other.requires_grad:
                other._accumulate(_reduce_to_shape(g * self.data, other.shape))
        out._backward = bw
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = other if isinstance(other, Tensor) else Tensor(_as_array(other, self.dtype))
        out = Tensor(self.data / other.data, self.requires_grad or other.requires_grad,
                     (self, other))

        def bw(g):
            if self.requires_grad:
                self._accumulate(_reduce_to_shape(g / other.data, self.shape))
            if other.requires_grad:
                other._accumulate(_reduce_to_shape(-g * self.data / (other.data ** 2), other.shape))
        out._backward = bw
        return out

    def __rtruediv__(self, other):
        return Tensor(_as_array(other, self.dtype)) / self

    def __pow__(self, exponent):
        if not isinstance(exponent, (int, float)):
            raise TypeError("only scalar exponents are supported")
        out = Tensor(self.data ** exponent, self.requires_grad, (self,))

        def bw(g):
            if self.requires_grad:
                self._accumulate(g * exponent * self.data ** (exponent - 1))
        out._backward = bw
        return out

    def __matmul__(self, other):
        other = other if isinstance(other, Tensor) else Tensor(_as_array(other, self.dtype))
        out = Tensor(np.matmul(self.data, other.data),
                     self.requires_grad or other.requires_grad, (self, other))

        def bw(g):
            if self.requires_grad:
                ga = np.matmul(g, np.swapaxes(other.data, -1, -2))
                self._accumulate(_reduce_to_shape(ga, self.shape))
            if other.requires_grad:
                gb = np.matmul(np.swapaxes(self.data, -1, -2), g)
                other._accumulate(_reduce_to_shape(gb, other.shape))
        out._backward = bw
        return out

    # -- shape ops -----------------------------------------------------------
    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        old = self.shape
        out = Tensor(self.data.reshape(shape), self.requires_grad, (self,))

        def bw(g):
            if self.requires_grad:
                self._accumulate(g.reshape(old))
        out._backward = bw
        return out

    def transpose(self, axes):
        inv = np.argsort(axes)
        out = Tensor(self.data.transpose(axes), self.requires_grad, (self,))

        def bw(g):
            if self.requires_grad:
                self._accumulate(g.transpose(inv))
        out._backward = bw
        return out

    def __getitem__(self, idx):
        out = Tensor(self.data[idx], self.requires_grad, (self,))

        def bw(g):
            if self.requires_grad:
                full = np.zeros_like(self.data)
                np.add.at(full, idx, g)
                self._accumulate(full)
        out._backward = bw
        return out

    # -- reductions (float64 accumulation) ------------------------------------
    def sum(self, axis=None, keepdims=False):
        val = self.data.sum(axis=axis, keepdims=keepdims, dtype=np.float64)
        out = Tensor(val.astype(self.dtype), self.requires_grad, (self,))

        def bw(g):
            if not self.requires_grad:
                return
            if axis is None:
                self._accumulate(np.broadcast_to(g, self.shape).copy())
                return
            if not keepdims:
                g = np.expand_dims(g, axis)
            self._accumulate(np.broadcast_to(g, self.shape).copy())
        out._backward = bw
        return out

    def mean(self, axis=None, keepdims=False):
        if axis is None:
            count = self.size
        else:
            axes = axis if isinstance(axis, tuple) else (axis,)
            count = 1
            for a in axes:
                count *= self.shape[a]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    # -- elementwise nonlinearities ---------------------------------------------
    def exp(self):
        val = np.exp(self.data)
        out = Tensor(val, self.requires_grad, (self,))

        def bw(g):
            if self.requires_grad:
                self._accumulate(g * val)
        out._backward = bw
        return out

    def log(self):
        out = Tensor(np.log(self.data), self.requires_grad, (self,))

        def bw(g):
            if self.requires_grad:
                self._accumulate(g / self.data)
        out._backward = bw
        return out

    def sqrt(self):
        val = np.sqrt(self.data)
        out = Tensor(val, self.requires_grad, (self,))

        def bw(g):
            if self.requires_grad:
                self._accumulate(g * 0.5 / val)
        out._backward = bw
        return out

    def sigmoid(self):
        val = 1.0 / (1.0 + np.exp(-self.data))
        out = Tensor(val, self.requires_grad, (self,))

        def bw(g):
            if self.requires_grad:
                self._accumulate(g * val * (1.0 - val))
        out._backward = bw
        return out

    def silu(self):
        sig = 1.0 / (1.0 + np.exp(-self.data))
        out = Tensor(self.data * sig, self.requires_grad, (self,))

        def bw(g):
            if self.requires_grad:
                self._accumulate(g * sig * (1.0 + self.data * (1.0 - sig)))
        out._backward = bw
        return out


# -- free functions --------------------------------------------------------

def concat(tensors, axis=-1):
    tensors = list(tensors)
    data = np.concatenate([t.data for t in tensors], axis=axis)
    req = any(t.requires_grad for t in tensors)
    out = Tensor(data, req, tuple(tensors))
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def bw(g):
        for t, piece in zip(tensors, np.split(g, splits, axis=axis)):
            if t.requires_grad:
                t._accumulate(piece)
    out._backward = bw
    return out


def softmax(x, axis=-1):
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    p = e / e.sum(axis=axis, keepdims=True, dtype=np.float64).astype(x.dtype)
    out = Tensor(p, x.requires_grad, (x,))

    def bw(g):
        if x.requires_grad:
            dot = (g * p).sum(axis=axis, keepdims=True, dtype=np.float64).astype(x.dtype)
            x._accumulate(p * (g - dot))
    out._backward = bw
    return out


def embedding(table, indices):
    """Row lookup into a (num_entries, width) parameter table."""
    idx = np.asarray(indices, dtype=np.int64)
    out = Tensor(table.data[idx], table.requires_grad, (table,))

    def bw(g):
        if table.requires_grad:
            full = np.zeros_like(table.data)
            np.add.at(full, idx, g)
            table._accumulate(full)
    out._backward = bw
    return out


def _im2col(x, kh, kw):
    """(B, H, W, C) -> (B, H-kh+1, W-kw+1, kh*kw*C) patch matrix (copies)."""
    b, h, w, c = x.shape
    ho, wo = h - kh + 1, w - kw + 1
    s0, s1, s2, s3 = x.strides
    view = np.lib.stride_tricks.as_strided(
        x, shape=(b, ho, wo, kh, kw, c), strides=(s0, s1, s2, s1, s2, s3))
    return view.reshape(b, ho, wo, kh * kw * c)


def conv2d(x, w, b=None):
    """Stride-1 'same' 2D convolution; x (B,H,W,Cin), w (kh,kw,Cin,Cout), odd kernels."""
    kh, kw, cin, cout = w.shape
    if x.shape[-1] != cin:
        raise ValueError(f"conv2d channel mismatch: input has {x.shape[-1]}, kernel expects {cin}")
    ph, pw = kh // 2, kw // 2
    xp = np.pad(x.data, ((0, 0), (ph, ph), (pw, pw), (0, 0)))
    cols = _im2col(xp, kh, kw)
    val = cols @ w.data.reshape(kh * kw * cin, cout)
    if b is not None:
        val = val + b.data
    parents = (x, w) if b is None else (x, w, b)
    out = Tensor(val, any(p.requires_grad for p in parents), parents)

    def bw(g):
        bsz, ho, wo, _ = g.shape
        if w.requires_grad:
            gw = np.matmul(cols.reshape(-1, kh * kw * cin).T, g.reshape(-1, cout))
            w._accumulate(gw.reshape(kh, kw, cin, cout))
        if b is not None and b.requires_grad:
            b._accumulate(g.sum(axis=(0, 1, 2), dtype=np.float64).astype(g.dtype))
        if x.requires_grad:
            # Input gradient: full correlation of g with the flipped kernel.
            gp = np.pad(g, ((0, 0), (ph, ph), (pw, pw), (0, 0)))
            gcols = _im2col(gp, kh, kw)
            wflip = w.data[::-1, ::-1].transpose(0, 1, 3, 2).reshape(kh * kw * cout, cin)
            x._accumulate(gcols @ wflip)
    out._backward = bw
    return out


def avg_pool2(x):
    """2x2 average pooling over the (H, W) axes of (B, H, W, C)."""
    b, h, w, c = x.shape
    val = x.data.reshape(b, h // 2, 2, w // 2, 2, c).mean(axis=(2, 4), dtype=np.float64)
    out = Tensor(val.astype(x.dtype), x.requires_grad, (x,))

    def bw(g):
        if x.requires_grad:
            gin = np.repeat(np.repeat(g, 2, axis=1), 2, axis=2) * 0.25
            x._accumulate(gin)
    out._backward = bw
    return out


def upsample2(x):
    """Nearest-neighbour 2x upsampling over the (H, W) axes of (B, H, W, C)."""
    val = np.repeat(np.repeat(x.data, 2, axis=1), 2, axis=2)
    out = Tensor(val, x.requires_grad, (x,))

    def bw(g):
        if x.requires_grad:
            b, h, w, c = g.shape
            gin = g.reshape(b, h // 2, 2, w // 2, 2, c).sum(axis=(2, 4), dtype=np.float64)
            x._accumulate(gin.astype(g.dtype))
    out._backward = bw
    return out


def layer_norm(x, gain, bias, eps=1e-5):
    """Normalize over the last axis; gain/bias are (C,) parameters."""
    mu = x.mean(axis=-1, keepdims=True)
    centered = x - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv = (var + eps) ** -0.5
    return centered * inv * gain + bias
