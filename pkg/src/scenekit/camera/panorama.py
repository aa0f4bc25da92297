"""Equirectangular stitching of ring-rig views at a fixed scene depth."""

from __future__ import annotations

import numpy as np

from .project import NEAR_PLANE, sample_bilinear


def stitch_panorama(images, rig, depth=10.0, width=256, vfov=None):
    """Blend all views into one 360-degree panorama.

    Panorama columns cover exactly 2*pi of azimuth; rows cover `vfov`
    (default: the cameras' vertical field of view) centred on the horizon.
    Each panorama pixel is unprojected to a sphere of radius `depth` around
    the rig centre and sampled from every camera that sees it, weighted by
    a linear feather on the distance to that camera's image border.
    """
    if depth <= 0:
        raise ValueError("depth must be positive")
    images = np.asarray(images, dtype=np.float32)
    cam0 = rig.cameras[0]
    if vfov is None:
        vfov = 2 * np.arctan((cam0.height / 2) / cam0.focal)
    height = max(1, round(width * vfov / (2 * np.pi)))
    center = np.mean([cam.p for cam in rig.cameras], axis=0)

    az = (np.arange(width) + 0.5) / width * 2 * np.pi
    el = vfov / 2 - (np.arange(height) + 0.5) / height * vfov
    azg, elg = np.meshgrid(az, el)
    dirs = np.stack([np.cos(elg) * np.cos(azg),
                     np.cos(elg) * np.sin(azg),
                     np.sin(elg)], axis=-1)
    pts = center + depth * dirs

    acc = np.zeros((height, width, images.shape[-1]), dtype=np.float64)
    wacc = np.zeros((height, width), dtype=np.float64)
    for cam, img in zip(rig.cameras, images):
        uv, z = cam.project(pts)
        sampled, inb = sample_bilinear(img, uv[..., 0], uv[..., 1])
        vis = (z > NEAR_PLANE) & inb
        border = np.minimum(np.minimum(uv[..., 0], cam.width - 1 - uv[..., 0]),
                            np.minimum(uv[..., 1], cam.height - 1 - uv[..., 1]))
        weight = np.where(vis, np.maximum(border, 0.0) + 1e-3, 0.0)
        acc += sampled * weight[..., None]
        wacc += weight
    out = np.where(wacc[..., None] > 0, acc / np.maximum(wacc, 1e-12)[..., None], 0.0)
    return out.astype(np.float32)
