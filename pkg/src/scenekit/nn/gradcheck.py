"""Central finite-difference verification of reverse-mode gradients."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor


def grad_check(f, x, eps=1e-4):
    """Max relative error between reverse-mode and finite-difference gradients.

    f maps a Tensor to a scalar Tensor and must be a pure function of x.
    Run it in float64 (cast x and any closed-over parameters) for meaningful
    tolerances; eps must be positive.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    x = Tensor(np.asarray(x.data if isinstance(x, Tensor) else x, dtype=np.float64),
               requires_grad=True)
    out = f(x)
    if out.size != 1:
        raise ValueError("grad_check needs a scalar-valued function")
    if not np.isfinite(out.data).all():
        raise FloatingPointError("non-finite value in forward pass")
    out.backward()
    analytic = x.grad.copy()

    numeric = np.zeros_like(x.data)
    flat = x.data.reshape(-1)
    nflat = numeric.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        hi = float(f(Tensor(x.data.copy())).data)
        flat[i] = orig - eps
        lo = float(f(Tensor(x.data.copy())).data)
        flat[i] = orig
        nflat[i] = (hi - lo) / (2.0 * eps)
    if not (np.isfinite(analytic).all() and np.isfinite(numeric).all()):
        raise FloatingPointError("non-finite value in gradient evaluation")

    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denom))
