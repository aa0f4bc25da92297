"""Sinusoidal feature encoding shared by time-of-day and timestep embeddings."""

from __future__ import annotations

import numpy as np


def sinusoidal_encode(values, num_freqs):
    """Encode each value x as (sin 2^k x, cos 2^k x) for k = 0..num_freqs-1.

    Output order is value-major, frequency-minor, sin before cos, so
    encode((a, b)) == concat(encode(a), encode(b)). Works on any array;
    the encoding axis is appended last.
    """
    if num_freqs < 1:
        raise ValueError("num_freqs must be >= 1")
    x = np.asarray(values, dtype=np.float64)
    freqs = 2.0 ** np.arange(num_freqs)
    ang = x[..., None] * freqs  # (..., V, F)
    enc = np.stack([np.sin(ang), np.cos(ang)], axis=-1)  # (..., V, F, 2)
    return enc.reshape(x.shape[:-1] + (x.shape[-1] * num_freqs * 2,)).astype(np.float32)
