"""Deterministic flat-shaded renderer for toy driving scenes.

Painter's-algorithm rasterization over cuboid agents at low resolution, with
parametric weather recolorings, so the same scene rendered under two global
conditions stays pixel-comparable and agent edits stay local.
"""

from __future__ import annotations

import hashlib

import numpy as np

from ..camera.project import NEAR_PLANE, box_visible, fill_convex

SKY_DISTANCE = 60.0
FOG_LENGTH = 14.0
LANE_HALF_WIDTH = 0.18
DASH_PERIOD = 4.0

_VEHICLE_PALETTE = np.array([
    (0.70, 0.12, 0.12), (0.12, 0.22, 0.62), (0.80, 0.80, 0.82),
    (0.10, 0.10, 0.12), (0.72, 0.52, 0.12), (0.35, 0.55, 0.35),
])
_PED_PALETTE = np.array([
    (0.65, 0.35, 0.25), (0.30, 0.45, 0.60), (0.55, 0.25, 0.45),
])
_LANE_COLORS = {
    "solid": np.array([0.85, 0.85, 0.80]),
    "dashed": np.array([0.88, 0.82, 0.55]),
    "curb": np.array([0.18, 0.18, 0.20]),
}


def sun_angles(hour):
    """Toy solar model: elevation peaks at noon, is zero at 6h/18h, and the
    azimuth sweeps a full turn per day."""
    if not (0.0 <= hour < 24.0):
        raise ValueError("hour must lie in [0, 24)")
    elevation = (np.pi / 2) * np.sin(np.pi * (hour - 6.0) / 12.0)
    azimuth = 2 * np.pi * hour / 24.0
    return float(elevation), float(azimuth)


def _daylight(elevation):
    return 0.08 + 0.92 * float(np.clip(np.sin(elevation), 0.0, 1.0))


def _sun_vector(elevation, azimuth):
    ce = np.cos(elevation)
    return np.array([ce * np.cos(azimuth), ce * np.sin(azimuth), np.sin(elevation)])


def _agent_albedo(box):
    digest = hashlib.sha256(box.flatten().tobytes()).digest()
    pick = digest[0]
    jitter = (digest[1] / 255.0 - 0.5) * 0.1
    if box.agent_type == "vehicle":
        base = _VEHICLE_PALETTE[pick % len(_VEHICLE_PALETTE)]
    elif box.agent_type == "pedestrian":
        base = _PED_PALETTE[pick % len(_PED_PALETTE)]
    else:
        g = 0.42 + (pick % 5) * 0.05
        base = np.array([g, g, g * 1.03])
    return np.clip(base + jitter, 0.02, 0.98)


def _ground_albedo(scene, hits, on_ground):
    """Per-pixel ground-plane albedo with lane markings."""
    albedo = np.broadcast_to(np.asarray(scene.ground_color, dtype=np.float64),
                             hits.shape).copy()
    xy = hits[..., :2]
    for lane in scene.lanes:
        a = np.asarray(lane.start_xy)
        b = np.asarray(lane.end_xy)
        ab = b - a
        denom = float(ab @ ab)
        if denom < 1e-12:
            continue
        t = np.clip(((xy - a) @ ab) / denom, 0.0, 1.0)
        closest = a + t[..., None] * ab
        dist = np.linalg.norm(xy - closest, axis=-1)
        hit = (dist < LANE_HALF_WIDTH) & on_ground
        if lane.lane_type == "dashed":
            arclen = t * np.sqrt(denom)
            hit &= (arclen % DASH_PERIOD) < (DASH_PERIOD / 2)
        albedo[hit] = _LANE_COLORS[lane.lane_type]
    return albedo


def _weather_ground(albedo, weather):
    if weather == "snowy":
        return albedo * 0.25 + np.array([0.92, 0.93, 0.95]) * 0.75
    if weather == "rainy":
        return albedo * 0.55
    return albedo


def _sky_color(dirs_world, weather, daylight):
    elev = np.arcsin(np.clip(dirs_world[..., 2], -1.0, 1.0))
    w = np.clip(elev / (np.pi / 2), 0.0, 1.0)[..., None]
    sky = (1 - w) * np.array([0.66, 0.74, 0.85]) + w * np.array([0.25, 0.45, 0.75])
    if weather == "rainy":
        sky = 0.3 * sky + 0.7 * np.array([0.50, 0.52, 0.55])
    elif weather == "snowy":
        sky = 0.5 * sky + 0.5 * np.array([0.75, 0.77, 0.80])
    return sky * daylight


def _rain_streaks(seed, view_index, height, width):
    rng = np.random.Generator(np.random.PCG64(seed * 1000003 + view_index * 97 + 7))
    mask = np.zeros((height, width), dtype=np.float64)
    for _ in range(35):
        x = int(rng.integers(0, width))
        y = int(rng.integers(0, max(1, height - 5)))
        length = int(rng.integers(3, 6))
        for k in range(length):
            yy, xx = y + k, x + k // 2
            if yy < height and xx < width:
                mask[yy, xx] = 1.0
    return mask


def _face_list(box, cam, shade_fn):
    """Visible (distance, projected quad, color) triples for one cuboid."""
    if not box_visible(box, cam):
        return []
    corners = box.corners()
    albedo = _agent_albedo(box)
    c, s = np.cos(box.yaw), np.sin(box.yaw)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    faces = [
        ((0, 1, 3, 2), (-1, 0, 0)), ((4, 5, 7, 6), (1, 0, 0)),
        ((0, 1, 5, 4), (0, -1, 0)), ((2, 3, 7, 6), (0, 1, 0)),
        ((0, 2, 6, 4), (0, 0, -1)), ((1, 3, 7, 5), (0, 0, 1)),
    ]
    out = []
    for idx, local_n in faces:
        pts = corners[list(idx)]
        centroid = pts.mean(axis=0)
        normal = rot @ np.asarray(local_n, dtype=np.float64)
        to_face = centroid - cam.p
        if normal @ to_face >= 0:
            continue  # back-facing
        uv, _ = cam.project(pts)
        dist = float(np.linalg.norm(to_face))
        out.append((dist, uv, shade_fn(normal) * albedo))
    return out


def render_views(scene, rig):
    """Render every rig camera; returns (N, H, W, 3) float32 clamped to [0, 1]."""
    elevation, azimuth = sun_angles(scene.hour)
    daylight = _daylight(elevation)
    sun = _sun_vector(elevation, azimuth)
    diffuse_gate = float(np.clip(np.sin(elevation) * 3.0, 0.0, 1.0))

    def shade(normal):
        lambert = max(0.0, float(normal @ sun)) * diffuse_gate
        return daylight * (0.35 + 0.65 * lambert)

    ground_shade = shade(np.array([0.0, 0.0, 1.0]))
    h, w = rig.resolution
    views = np.zeros((len(rig), h, w, 3), dtype=np.float64)

    for vi, cam in enumerate(rig.cameras):
        dirs = cam.pixel_dirs() @ cam.r.T
        dz = dirs[..., 2]
        on_ground = dz < -1e-9
        with np.errstate(divide="ignore", invalid="ignore"):
            t_ground = np.where(on_ground, -cam.p[2] / dz, SKY_DISTANCE)
        hits = cam.p + t_ground[..., None] * dirs

        albedo = _ground_albedo(scene, hits, on_ground)
        albedo = _weather_ground(albedo, scene.weather)
        color = np.where(on_ground[..., None], albedo * ground_shade,
                         _sky_color(dirs, scene.weather, daylight))
        depth = np.where(on_ground, t_ground, SKY_DISTANCE)

        faces = []
        for box in scene.agents:
            faces.extend(_face_list(box, cam, shade))
        faces.sort(key=lambda f: -f[0])
        for dist, uv, face_color in faces:
            mask = fill_convex(uv, h, w)
            color[mask] = face_color
            depth[mask] = dist

        if scene.weather == "foggy":
            fog_w = 1.0 - np.exp(-depth / FOG_LENGTH)
            fog_color = np.array([0.62, 0.64, 0.66]) * daylight
            color = color * (1 - fog_w[..., None]) + fog_color * fog_w[..., None]
        if scene.weather == "rainy":
            color = color + 0.10 * _rain_streaks(scene.seed, vi, h, w)[..., None]

        views[vi] = color

    return np.clip(views, 0.0, 1.0).astype(np.float32)
