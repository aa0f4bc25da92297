"""Cross-view projection, neighbor pairs, and agent-silhouette masks."""

from __future__ import annotations

import numpy as np

NEAR_PLANE = 0.1


def overlap_pairs(rig):
    """Ordered neighbor pairs (i, i+1 mod N) and (i+1 mod N, i): 2N for N > 2.

    For N = 2 the two neighbors coincide, so exactly {(0, 1), (1, 0)} remains.
    """
    n = len(rig)
    if n < 2:
        raise ValueError("overlap pairs need at least 2 cameras")
    if n == 2:
        return [(0, 1), (1, 0)]
    pairs = []
    for i in range(n):
        pairs.append((i, (i + 1) % n))
    for i in range(n):
        pairs.append(((i + 1) % n, i))
    return pairs


def sample_bilinear(image, u, v):
    """Bilinear sample of (H, W, C) at continuous (u, v); also returns an
    in-bounds mask (every tap inside the image, no clamping)."""
    h, w = image.shape[:2]
    u0 = np.floor(u).astype(np.int64)
    v0 = np.floor(v).astype(np.int64)
    inb = (u0 >= 0) & (u0 + 1 <= w - 1) & (v0 >= 0) & (v0 + 1 <= h - 1)
    u0c = np.clip(u0, 0, w - 2)
    v0c = np.clip(v0, 0, h - 2)
    fu = (u - u0c)[..., None]
    fv = (v - v0c)[..., None]
    tl = image[v0c, u0c]
    tr = image[v0c, u0c + 1]
    bl = image[v0c + 1, u0c]
    br = image[v0c + 1, u0c + 1]
    out = (tl * (1 - fu) * (1 - fv) + tr * fu * (1 - fv)
           + bl * (1 - fu) * fv + br * fu * fv)
    return out, inb


def project_view(image_i, cam_i, cam_j, depth):
    """Warp view i into view j's frame through a fronto-parallel plane.

    Every pixel of view j is unprojected to z = depth in camera j's frame and
    bilinearly sampled from view i. `valid` marks pixels whose sample point
    lies inside camera i's frustum; an empty overlap gives an all-false mask.
    """
    if depth <= 0:
        raise ValueError("depth must be positive")
    h, w = cam_j.height, cam_j.width
    f = cam_j.focal
    u = (np.arange(w) + 0.5 - w / 2) / f
    v = (np.arange(h) + 0.5 - h / 2) / f
    xx, yy = np.meshgrid(u, v)
    pts_camj = np.stack([xx, yy, np.ones_like(xx)], axis=-1) * depth
    pts_world = pts_camj @ cam_j.r.T + cam_j.p

    uv, z = cam_i.project(pts_world)
    in_front = z > NEAR_PLANE
    sampled, inb = sample_bilinear(np.asarray(image_i, dtype=np.float32),
                                   uv[..., 0], uv[..., 1])
    valid = in_front & inb
    warped = np.where(valid[..., None], sampled, 0.0).astype(np.float32)
    return warped, valid


def _convex_hull(points):
    """Andrew monotone chain; points (M, 2) -> hull vertices, counterclockwise."""
    pts = sorted(set(map(tuple, np.asarray(points, dtype=np.float64))))
    if len(pts) < 3:
        return np.asarray(pts)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.asarray(lower[:-1] + upper[:-1])


def fill_convex(points, height, width):
    """Rasterize the convex hull of 2D pixel-space points: centres inside."""
    hull = _convex_hull(points)
    if len(hull) < 3:
        return np.zeros((height, width), dtype=bool)
    xx, yy = np.meshgrid(np.arange(width, dtype=np.float64),
                         np.arange(height, dtype=np.float64))
    mask = np.ones((height, width), dtype=bool)
    m = len(hull)
    for k in range(m):
        a = hull[k]
        b = hull[(k + 1) % m]
        # counterclockwise hull: interior is on the left of each edge
        mask &= (b[0] - a[0]) * (yy - a[1]) - (b[1] - a[1]) * (xx - a[0]) >= 0
    return mask


def box_visible(box, cam):
    """A box is drawable in a view only when all 8 corners clear the near plane."""
    local = (box.corners() - cam.p) @ cam.r
    return bool(np.all(local[:, 2] > NEAR_PLANE))


def project_box_mask(box, cam):
    """Silhouette of a cuboid: filled convex hull of its 8 projected corners."""
    if not box_visible(box, cam):
        return np.zeros((cam.height, cam.width), dtype=bool)
    uv, _ = cam.project(box.corners())
    return fill_convex(uv, cam.height, cam.width)


def project_agent_masks(scene, rig, indices=None):
    """(N, H, W) union of foreground-agent silhouettes per view.

    background_static boxes never contribute; `indices` restricts to a subset
    of scene.agents (non-foreground entries in it are still excluded).
    """
    if indices is None:
        boxes = scene.foreground_agents()
    else:
        boxes = tuple(scene.agents[i] for i in indices if scene.agents[i].is_foreground())
    h, w = rig.resolution
    masks = np.zeros((len(rig), h, w), dtype=bool)
    for vi, cam in enumerate(rig.cameras):
        for box in boxes:
            masks[vi] |= project_box_mask(box, cam)
    return masks


def per_agent_masks(scene, rig):
    """One (N, H, W) mask per foreground agent, in scene.agents order."""
    return [project_agent_masks(scene, rig, indices=(i,))
            for i in scene.foreground_indices()]


def ground_mask(rig):
    """(N, H, W) pixels whose rays hit the ground plane: the non-sky region."""
    h, w = rig.resolution
    out = np.zeros((len(rig), h, w), dtype=bool)
    for vi, cam in enumerate(rig.cameras):
        d_world = cam.pixel_dirs() @ cam.r.T
        out[vi] = d_world[..., 2] < -1e-9
    return out
