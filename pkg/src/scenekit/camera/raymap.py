"""Per-pixel ray origin/direction maps, normalized to the first camera."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RaymapBatch:
    origins: np.ndarray     # (N, H, W, 3), camera-0 frame, metres
    directions: np.ndarray  # (N, H, W, 3), unit vectors in the camera-0 frame

    def channels(self):
        """(N, H, W, 6) origin+direction stack for channel concatenation."""
        return np.concatenate([self.origins, self.directions], axis=-1).astype(np.float32)


def raymap(rig):
    """Rays through every pixel of every view, expressed in camera 0's frame.

    Expressing everything relative to camera 0 makes the output invariant to
    rigid transformations applied to the whole rig.
    """
    cam0 = rig.cameras[0]
    r0t = cam0.r.T
    origins, dirs = [], []
    for cam in rig.cameras:
        d_world = cam.pixel_dirs() @ cam.r.T
        d0 = d_world @ r0t.T
        o0 = r0t @ (cam.p - cam0.p)
        origins.append(np.broadcast_to(o0, d0.shape).copy())
        dirs.append(d0)
    out = RaymapBatch(np.stack(origins).astype(np.float64),
                      np.stack(dirs).astype(np.float64))
    norms = np.linalg.norm(out.directions, axis=-1)
    if not np.allclose(norms, 1.0, atol=1e-6):
        raise AssertionError("raymap directions must be unit-norm")
    return out


def resize_raymap(channels, h, w):
    """Area-average a (N, H, W, 6) raymap stack to (N, h, w, 6), then re-normalize
    the direction half so it stays unit-length."""
    n, hh, ww, c = channels.shape
    if hh % h or ww % w:
        raise ValueError("raymap resize requires integer downsample factors")
    fh, fw = hh // h, ww // w
    pooled = channels.reshape(n, h, fh, w, fw, c).mean(axis=(2, 4))
    d = pooled[..., 3:6]
    pooled[..., 3:6] = d / np.linalg.norm(d, axis=-1, keepdims=True)
    return pooled
