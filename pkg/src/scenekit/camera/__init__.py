from .rig import Camera, CameraRig, make_ring_rig, transform_rig
from .raymap import RaymapBatch, raymap, resize_raymap
from .project import (
    fill_convex,
    ground_mask,
    overlap_pairs,
    per_agent_masks,
    project_agent_masks,
    project_view,
    sample_bilinear,
)
from .panorama import stitch_panorama

__all__ = [
    "Camera", "CameraRig", "make_ring_rig", "transform_rig", "RaymapBatch",
    "raymap", "resize_raymap", "overlap_pairs", "project_view",
    "project_agent_masks", "per_agent_masks", "ground_mask", "fill_convex",
    "sample_bilinear", "stitch_panorama",
]
