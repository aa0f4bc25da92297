"""Ground-truth scene description for the toy multi-camera driving world."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

WEATHERS = ("sunny", "rainy", "foggy", "snowy")
LANE_TYPES = ("solid", "dashed", "curb")
AGENT_TYPES = ("vehicle", "pedestrian", "background_static")
FOREGROUND_TYPES = ("vehicle", "pedestrian")

WORLD_BOUND = 50.0  # scene content lives in [-50, 50]^2 metres


@dataclass(frozen=True)
class LaneSegment:
    start_xy: tuple[float, float]
    end_xy: tuple[float, float]
    lane_type: str

    def __post_init__(self):
        if self.lane_type not in LANE_TYPES:
            raise ValueError(f"unknown lane_type {self.lane_type!r}")


@dataclass(frozen=True)
class AgentBox:
    center_xyz: tuple[float, float, float]
    size_lwh: tuple[float, float, float]
    yaw: float
    agent_type: str

    def __post_init__(self):
        if self.agent_type not in AGENT_TYPES:
            raise ValueError(f"unknown agent_type {self.agent_type!r}")
        if any(s <= 0 for s in self.size_lwh):
            raise ValueError("size_lwh components must be positive")
        if not (-np.pi <= self.yaw < np.pi):
            raise ValueError("yaw must lie in [-pi, pi)")

    def flatten(self):
        """8-field vector in the fixed order (x, y, z, l, w, h, yaw, type index)."""
        x, y, z = self.center_xyz
        l, w, h = self.size_lwh
        return np.array([x, y, z, l, w, h, self.yaw, AGENT_TYPES.index(self.agent_type)],
                        dtype=np.float64)

    def corners(self):
        """World-frame (8, 3) cuboid corners; l along heading, w lateral, h up."""
        l, w, h = self.size_lwh
        sx = np.array([-1, 1]) * (l / 2)
        sy = np.array([-1, 1]) * (w / 2)
        sz = np.array([-1, 1]) * (h / 2)
        local = np.array([(x, y, z) for x in sx for y in sy for z in sz])
        c, s = np.cos(self.yaw), np.sin(self.yaw)
        rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        return local @ rot.T + np.asarray(self.center_xyz)

    def footprint(self):
        """(4, 2) ground-plane rectangle corners."""
        return self.corners()[::2, :2]

    def is_foreground(self):
        return self.agent_type in FOREGROUND_TYPES


@dataclass(frozen=True)
class SceneSpec:
    seed: int
    ground_color: tuple[float, float, float]
    lanes: tuple[LaneSegment, ...]
    agents: tuple[AgentBox, ...]
    weather: str
    hour: float

    def __post_init__(self):
        if self.weather not in WEATHERS:
            raise ValueError(f"unknown weather {self.weather!r}")
        if not (0.0 <= self.hour < 24.0):
            raise ValueError("hour must lie in [0, 24)")

    def foreground_agents(self):
        return tuple(a for a in self.agents if a.is_foreground())

    def foreground_indices(self):
        return tuple(i for i, a in enumerate(self.agents) if a.is_foreground())

    def without_foreground(self):
        """The ground-truth 'empty street': all vehicles/pedestrians removed."""
        return replace(self, agents=tuple(a for a in self.agents if not a.is_foreground()))


@dataclass(frozen=True)
class WorldConfig:
    max_lanes: int = 64
    max_agents: int = 16
    min_agents: int = 0
    weather_probs: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
    agent_min_dist: float = 5.0     # keep the camera ring clear
    agent_max_dist: float = 28.0
    placement_margin: float = 0.4   # extra metres between footprints
    rejection_budget: int = 200

    def __post_init__(self):
        if self.max_lanes <= 0 or self.max_agents < 0:
            raise ValueError("config maxima must be positive")
        if abs(sum(self.weather_probs) - 1.0) > 1e-9:
            raise ValueError("weather_probs must sum to 1")


def scene_to_json(scene):
    doc = {
        "seed": scene.seed,
        "ground_color": list(scene.ground_color),
        "lanes": [{"start_xy": list(l.start_xy), "end_xy": list(l.end_xy),
                   "lane_type": l.lane_type} for l in scene.lanes],
        "agents": [{"center_xyz": list(a.center_xyz), "size_lwh": list(a.size_lwh),
                    "yaw": a.yaw, "agent_type": a.agent_type} for a in scene.agents],
        "weather": scene.weather,
        "hour": scene.hour,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def scene_from_json(text):
    doc = json.loads(text)
    return SceneSpec(
        seed=int(doc["seed"]),
        ground_color=tuple(doc["ground_color"]),
        lanes=tuple(LaneSegment(tuple(l["start_xy"]), tuple(l["end_xy"]), l["lane_type"])
                    for l in doc["lanes"]),
        agents=tuple(AgentBox(tuple(a["center_xyz"]), tuple(a["size_lwh"]),
                              a["yaw"], a["agent_type"]) for a in doc["agents"]),
        weather=doc["weather"],
        hour=float(doc["hour"]),
    )
