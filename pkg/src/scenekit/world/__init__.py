from .types import (
    AGENT_TYPES,
    FOREGROUND_TYPES,
    LANE_TYPES,
    WEATHERS,
    WORLD_BOUND,
    AgentBox,
    LaneSegment,
    SceneSpec,
    WorldConfig,
    scene_from_json,
    scene_to_json,
)
from .sampler import EDIT_KINDS, EditRequest, WorldSampleError, derive_edit, sample_world
from .render import render_views, sun_angles

__all__ = [
    "AGENT_TYPES", "FOREGROUND_TYPES", "LANE_TYPES", "WEATHERS", "WORLD_BOUND",
    "AgentBox", "LaneSegment", "SceneSpec", "WorldConfig", "scene_from_json",
    "scene_to_json", "EDIT_KINDS", "EditRequest", "WorldSampleError",
    "derive_edit", "sample_world", "render_views", "sun_angles",
]
