"""Pinhole cameras arranged on an outward-facing ring.

World frame is z-up; camera frame follows the x-right / y-down / z-forward
convention. Pixel (u, v) centres sit at (u + 0.5, v + 0.5), so a width-W
image spans exactly the horizontal field of view between its outer edges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Camera:
    position: tuple[float, float, float]
    rotation: tuple  # 3x3 row tuples, camera-to-world
    hfov: float
    width: int
    height: int

    def __post_init__(self):
        if not (0 < self.hfov < np.pi):
            raise ValueError("hfov must lie in (0, pi)")
        if self.width < 1 or self.height < 1:
            raise ValueError("resolution must be positive")

    @property
    def r(self):
        return np.asarray(self.rotation, dtype=np.float64)

    @property
    def p(self):
        return np.asarray(self.position, dtype=np.float64)

    @property
    def focal(self):
        return (self.width / 2) / np.tan(self.hfov / 2)

    def pixel_dirs(self):
        """(H, W, 3) unit ray directions in the camera frame."""
        f = self.focal
        u = (np.arange(self.width) + 0.5 - self.width / 2) / f
        v = (np.arange(self.height) + 0.5 - self.height / 2) / f
        xx, yy = np.meshgrid(u, v)
        d = np.stack([xx, yy, np.ones_like(xx)], axis=-1)
        return d / np.linalg.norm(d, axis=-1, keepdims=True)

    def project(self, pts_world):
        """World points (..., 3) -> pixel coords (..., 2) and camera-frame depth."""
        local = (np.asarray(pts_world) - self.p) @ self.r
        z = local[..., 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            u = self.focal * local[..., 0] / z + self.width / 2 - 0.5
            v = self.focal * local[..., 1] / z + self.height / 2 - 0.5
        return np.stack([u, v], axis=-1), z


@dataclass(frozen=True)
class CameraRig:
    cameras: tuple[Camera, ...]

    def __post_init__(self):
        if len(self.cameras) < 1:
            raise ValueError("a rig needs at least one camera")

    def __len__(self):
        return len(self.cameras)

    @property
    def resolution(self):
        cam = self.cameras[0]
        return cam.height, cam.width


def ring_rotation(azimuth):
    """Camera-to-world rotation for a level camera facing `azimuth`."""
    c, s = np.cos(azimuth), np.sin(azimuth)
    right = np.array([s, -c, 0.0])
    down = np.array([0.0, 0.0, -1.0])
    forward = np.array([c, s, 0.0])
    return np.stack([right, down, forward], axis=1)


def make_ring_rig(n=8, hfov=np.deg2rad(60.0), resolution=32, radius=1.0, height=1.5):
    """n outward-facing cameras with uniform azimuth spacing.

    The default (hfov 60 deg, spacing 45 deg) leaves a 15 deg overlap between
    neighbouring fields of view; constructions without positive overlap are
    rejected.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    spacing = 2 * np.pi / n
    if n > 1 and hfov <= spacing:
        raise ValueError("adjacent fields of view must overlap: hfov must exceed "
                         f"the {np.rad2deg(spacing):.1f} deg spacing")
    cams = []
    for i in range(n):
        az = i * spacing
        pos = (radius * np.cos(az), radius * np.sin(az), height)
        rot = tuple(tuple(row) for row in ring_rotation(az))
        cams.append(Camera(tuple(float(x) for x in pos), rot, float(hfov),
                           int(resolution), int(resolution)))
    return CameraRig(tuple(cams))


def transform_rig(rig, rotation, translation):
    """Apply one rigid world transform to every camera in the rig."""
    rot = np.asarray(rotation, dtype=np.float64)
    t = np.asarray(translation, dtype=np.float64)
    cams = []
    for cam in rig.cameras:
        p = rot @ cam.p + t
        r = rot @ cam.r
        cams.append(Camera(tuple(p.tolist()), tuple(tuple(row) for row in r),
                           cam.hfov, cam.width, cam.height))
    return CameraRig(tuple(cams))
