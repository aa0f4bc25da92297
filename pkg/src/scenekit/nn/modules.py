"""Parameter containers and small layers on top of the tensor engine.

Parameters are allocated with a shape and an init rule, then filled by
``Module.initialize(seed)``: each parameter draws from its own RNG stream
keyed by (seed, dotted name), so init is independent of construction order
and reproducible from a checkpoint's recorded seed.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .tensor import DEFAULT_DTYPE, Tensor, conv2d


class Parameter(Tensor):
    """A trainable tensor with an init rule and a dotted name path."""

    __slots__ = ("init", "fan_in", "fan_out", "name")

    def __init__(self, shape, init="glorot", fan_in=None, fan_out=None):
        super().__init__(np.zeros(shape, dtype=DEFAULT_DTYPE), requires_grad=True)
        self.init = init
        self.fan_in = fan_in
        self.fan_out = fan_out
        self.name = None


def _stream(seed, name):
    digest = hashlib.sha256(f"{seed}:{name}".encode()).digest()
    return np.random.Generator(np.random.PCG64(int.from_bytes(digest[:8], "little")))


class Module:
    """Minimal container: children and parameters are found by attribute walk."""

    def named_parameters(self, prefix=""):
        for key, value in vars(self).items():
            path = f"{prefix}.{key}" if prefix else key
            if isinstance(value, Parameter):
                yield path, value
            elif isinstance(value, Module):
                yield from value.named_parameters(path)
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{path}.{i}")
                    elif isinstance(item, Parameter):
                        yield f"{path}.{i}", item

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def initialize(self, seed):
        seen = set()
        for name, p in self.named_parameters():
            if name in seen:
                raise ValueError(f"duplicate parameter name {name!r}")
            seen.add(name)
            p.name = name
            rng = _stream(seed, name)
            if p.init == "zeros":
                p.data = np.zeros(p.shape, dtype=p.dtype)
            elif p.init == "ones":
                p.data = np.ones(p.shape, dtype=p.dtype)
            elif p.init == "glorot":
                bound = np.sqrt(6.0 / (p.fan_in + p.fan_out))
                p.data = rng.uniform(-bound, bound, size=p.shape).astype(p.dtype)
            elif p.init == "normal":
                p.data = (0.02 * rng.standard_normal(p.shape)).astype(p.dtype)
            else:
                raise ValueError(f"unknown init rule {p.init!r}")
        return self

    def zero_grad(self):
        for p in self.parameters():
            p.grad = None

    def astype(self, dtype):
        for p in self.parameters():
            p.data = p.data.astype(dtype)
        return self

    def state_dict(self):
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state):
        mine = dict(self.named_parameters())
        missing = set(mine) - set(state)
        if missing:
            raise KeyError(f"missing parameters: {sorted(missing)}")
        for name, p in mine.items():
            arr = state[name]
            if tuple(arr.shape) != tuple(p.shape):
                raise ValueError(f"shape mismatch for {name}: checkpoint {arr.shape}, model {p.shape}")
            p.data = np.asarray(arr, dtype=p.dtype).copy()
        return self


class Linear(Module):
    def __init__(self, d_in, d_out, bias=True):
        self.w = Parameter((d_in, d_out), fan_in=d_in, fan_out=d_out)
        self.b = Parameter((d_out,), init="zeros") if bias else None

    def __call__(self, x):
        out = x @ self.w
        if self.b is not None:
            out = out + self.b
        return out


class Conv2d(Module):
    """Stride-1 'same' convolution with odd kernels, NHWC layout."""

    def __init__(self, c_in, c_out, k=3):
        self.w = Parameter((k, k, c_in, c_out), fan_in=k * k * c_in, fan_out=k * k * c_out)
        self.b = Parameter((c_out,), init="zeros")

    def __call__(self, x):
        return conv2d(x, self.w, self.b)


class LayerNorm(Module):
    def __init__(self, width, eps=1e-5):
        self.gain = Parameter((width,), init="ones")
        self.bias = Parameter((width,), init="zeros")
        self.eps = eps

    def __call__(self, x):
        from .tensor import layer_norm
        return layer_norm(x, self.gain, self.bias, self.eps)
