"""Procedural scene sampling and ground-truth edit derivation."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .types import (
    AGENT_TYPES,
    WEATHERS,
    WORLD_BOUND,
    AgentBox,
    LaneSegment,
    SceneSpec,
    WorldConfig,
)

EDIT_KINDS = ("set_weather", "set_hour", "add_agent", "remove_agent")

_VEHICLE_L = (3.6, 5.4)
_VEHICLE_W = (1.6, 2.2)
_VEHICLE_H = (1.4, 2.0)
_PED_SIDE = (0.4, 0.8)
_PED_H = (1.5, 1.9)
_STATIC_SIDE = (0.6, 2.0)
_STATIC_H = (0.8, 2.5)


class WorldSampleError(RuntimeError):
    pass


@dataclass(frozen=True)
class EditRequest:
    kind: str
    weather: str | None = None
    hour: float | None = None
    agent: AgentBox | None = None
    index: int | None = None

    def __post_init__(self):
        if self.kind not in EDIT_KINDS:
            raise ValueError(f"unknown edit kind {self.kind!r}")


def _rect_axes(yaw):
    c, s = np.cos(yaw), np.sin(yaw)
    return np.array([[c, s], [-s, c]])


def _rects_overlap(box_a, box_b, margin):
    """Separating-axis test for two ground-plane oriented rectangles."""
    axes_a, axes_b = _rect_axes(box_a.yaw), _rect_axes(box_b.yaw)
    half_a = np.array(box_a.size_lwh[:2]) / 2 + margin / 2
    half_b = np.array(box_b.size_lwh[:2]) / 2 + margin / 2
    d = np.asarray(box_b.center_xyz[:2]) - np.asarray(box_a.center_xyz[:2])
    for ax in np.vstack([axes_a, axes_b]):
        ra = half_a @ np.abs(axes_a @ ax)
        rb = half_b @ np.abs(axes_b @ ax)
        if abs(ax @ d) > ra + rb:
            return False
    return True


def _in_bounds(box):
    return bool(np.all(np.abs(box.footprint()) <= WORLD_BOUND))


def _wrap_yaw(yaw):
    return float((yaw + np.pi) % (2 * np.pi) - np.pi)


def _sample_lanes(rng):
    """A main road through the origin plus an optional cross road."""
    lanes = []
    theta = rng.uniform(0, np.pi)
    offset = rng.uniform(-2.0, 2.0)
    d = np.array([np.cos(theta), np.sin(theta)])
    n = np.array([-d[1], d[0]])

    def road(direction, normal, shift):
        out = []
        for lateral, kind in ((-3.5, "solid"), (0.0, "dashed"), (3.5, "solid"),
                              (-5.5, "curb"), (5.5, "curb")):
            base = normal * (lateral + shift)
            a = base - direction * 45.0
            b = base + direction * 45.0
            out.append(LaneSegment(tuple(a.tolist()), tuple(b.tolist()), kind))
        return out

    lanes += road(d, n, offset)
    if rng.random() < 0.5:
        lanes += road(n, d, rng.uniform(-2.0, 2.0))
    return tuple(lanes), theta


def _sample_agent(rng, kind, road_theta):
    if kind == "vehicle":
        size = (rng.uniform(*_VEHICLE_L), rng.uniform(*_VEHICLE_W), rng.uniform(*_VEHICLE_H))
        yaw = road_theta + rng.choice([0.0, np.pi]) + rng.normal(0, 0.08)
    elif kind == "pedestrian":
        side = rng.uniform(*_PED_SIDE)
        size = (side, rng.uniform(*_PED_SIDE), rng.uniform(*_PED_H))
        yaw = rng.uniform(-np.pi, np.pi)
    else:
        size = (rng.uniform(*_STATIC_SIDE), rng.uniform(*_STATIC_SIDE), rng.uniform(*_STATIC_H))
        yaw = rng.uniform(-np.pi, np.pi)
    return size, _wrap_yaw(yaw)


def sample_world(seed, config=None):
    """Deterministically sample a SceneSpec; placement uses rejection sampling."""
    config = config or WorldConfig()
    rng = np.random.Generator(np.random.PCG64(int(seed)))

    base = 0.32 + rng.uniform(-0.04, 0.04)
    ground = (base, base, base + rng.uniform(0.0, 0.03))
    lanes, road_theta = _sample_lanes(rng)
    if len(lanes) > config.max_lanes:
        lanes = lanes[:config.max_lanes]
    weather = WEATHERS[rng.choice(len(WEATHERS), p=config.weather_probs)]
    hour = float(rng.uniform(0.0, 24.0))

    n_agents = int(rng.integers(config.min_agents, config.max_agents + 1)) \
        if config.max_agents > 0 else 0
    agents = []
    for _ in range(n_agents):
        kind = AGENT_TYPES[rng.choice(3, p=[0.6, 0.25, 0.15])]
        placed = False
        for _ in range(config.rejection_budget):
            dist = rng.uniform(config.agent_min_dist, config.agent_max_dist)
            ang = rng.uniform(0, 2 * np.pi)
            size, yaw = _sample_agent(rng, kind, road_theta)
            center = (dist * np.cos(ang), dist * np.sin(ang), size[2] / 2)
            box = AgentBox(tuple(float(v) for v in center),
                           tuple(float(v) for v in size), yaw, kind)
            if not _in_bounds(box):
                continue
            if any(_rects_overlap(box, other, config.placement_margin) for other in agents):
                continue
            agents.append(box)
            placed = True
            break
        if not placed:
            raise WorldSampleError(
                "agent placement failed: no interpenetration-free position within "
                f"the rejection budget ({config.rejection_budget} tries)")

    return SceneSpec(seed=int(seed), ground_color=tuple(float(c) for c in ground),
                     lanes=lanes, agents=tuple(agents), weather=weather, hour=hour)


def derive_edit(scene, edit):
    """A new SceneSpec differing from `scene` only in the edited field."""
    if edit.kind == "set_weather":
        if edit.weather not in WEATHERS:
            raise ValueError(f"unknown weather {edit.weather!r}")
        return replace(scene, weather=edit.weather)
    if edit.kind == "set_hour":
        if edit.hour is None or not (0.0 <= edit.hour < 24.0):
            raise ValueError("set_hour needs an hour in [0, 24)")
        return replace(scene, hour=float(edit.hour))
    if edit.kind == "remove_agent":
        if edit.index is None or not (0 <= edit.index < len(scene.agents)):
            raise IndexError(f"remove_agent index {edit.index} out of range "
                             f"for {len(scene.agents)} agents")
        agents = scene.agents[:edit.index] + scene.agents[edit.index + 1:]
        return replace(scene, agents=agents)
    if edit.kind == "add_agent":
        if edit.agent is None:
            raise ValueError("add_agent needs an AgentBox")
        if not _in_bounds(edit.agent):
            raise ValueError("add_agent: footprint outside world bounds")
        return replace(scene, agents=scene.agents + (edit.agent,))
    raise ValueError(f"unknown edit kind {edit.kind!r}")
