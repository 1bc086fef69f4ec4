"""Planning environment: wind field, start state, goal region, world bounds.

Environments are described by a versioned JSON document:

    {
      "version": 1,
      "ambient_wind": {"north": 0.0, "east": 0.0, "down": 0.0},
      "thermals": [
        {"center_north": 600.0, "center_east": 400.0, "radius": 150.0,
         "core_updraft": 3.0, "base_height": 0.0, "top_height": 600.0}
      ],
      "start": {"north": 0.0, "east": 0.0, "course_deg": 0.0, "height": 200.0},
      "goal": {"north": 1200.0, "east": 800.0, "height": 250.0, "radius": 50.0},
      "bounds": {"north": [0.0, 1500.0], "east": [0.0, 1500.0], "height": [0.0, 600.0]}
    }

`ambient_wind` may be omitted (defaults to calm air). Validation errors name
the offending field. `save_environment(load_environment(text))` round-trips.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import State
from .wind import Thermal, WindField, WindVector

__all__ = [
    "ConfigError",
    "GoalRegion",
    "WorldBounds",
    "Environment",
    "load_environment",
    "save_environment",
]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """A configuration document failed to parse or violated an invariant."""


@dataclass(frozen=True)
class GoalRegion:
    """Spherical goal region over (north, east, height); course is unconstrained."""

    north: float
    east: float
    height: float
    radius: float

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError(f"goal radius must be > 0, got {self.radius}")

    def contains(self, s: State) -> bool:
        dn = s.north - self.north
        de = s.east - self.east
        dh = s.height - self.height
        return dn * dn + de * de + dh * dh <= self.radius * self.radius


@dataclass(frozen=True)
class WorldBounds:
    """Axis-aligned world box; all limits inclusive."""

    north_min: float
    north_max: float
    east_min: float
    east_max: float
    height_min: float
    height_max: float

    def __post_init__(self):
        if not (self.north_min < self.north_max
                and self.east_min < self.east_max
                and self.height_min < self.height_max):
            raise ValueError("world bounds must have min < max on every axis")

    def contains(self, north: float, east: float, height: float) -> bool:
        return (self.north_min <= north <= self.north_max
                and self.east_min <= east <= self.east_max
                and self.height_min <= height <= self.height_max)

    def contains_state(self, s: State) -> bool:
        return self.contains(s.north, s.east, s.height)

    def as_array(self) -> np.ndarray:
        return np.array([
            [self.north_min, self.north_max],
            [self.east_min, self.east_max],
            [self.height_min, self.height_max],
        ])


@dataclass(frozen=True)
class Environment:
    """Everything a planning query needs besides the aircraft and planner settings."""

    wind: WindField
    start: State
    goal: GoalRegion
    bounds: WorldBounds
    name: str = "unnamed"


_MISSING = object()


def _get(obj: dict, key: str, path: str, kind=None, default=_MISSING):
    if key not in obj:
        if default is not _MISSING:
            return default
        raise ConfigError(f"{path}.{key}: missing required field")
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise ConfigError(f"{path}.{key}: expected {getattr(kind, '__name__', kind)}, "
                          f"got {type(value).__name__}")
    return value


def _number(obj: dict, key: str, path: str, default=_MISSING):
    v = _get(obj, key, path, default=default)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {type(v).__name__}")
    if not math.isfinite(v):
        raise ConfigError(f"{path}.{key}: must be finite, got {v!r}")
    return float(v)


def _pair(obj: dict, key: str, path: str) -> tuple[float, float]:
    v = _get(obj, key, path, kind=list)
    if len(v) != 2 or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        raise ConfigError(f"{path}.{key}: expected [min, max] numbers")
    return float(v[0]), float(v[1])


def _build(ctor, path: str, **kwargs):
    try:
        return ctor(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def load_environment(text: str) -> Environment:
    """Parse and validate an environment config document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"environment config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("environment config must be a JSON object")
    version = _get(doc, "version", "environment")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"environment.version: expected {SCHEMA_VERSION}, got {version!r}")

    ambient_doc = _get(doc, "ambient_wind", "environment", kind=dict, default={})
    ambient = _build(
        WindVector, "environment.ambient_wind",
        w_north=_number(ambient_doc, "north", "environment.ambient_wind", default=0.0),
        w_east=_number(ambient_doc, "east", "environment.ambient_wind", default=0.0),
        w_down=_number(ambient_doc, "down", "environment.ambient_wind", default=0.0),
    )

    thermals = []
    for i, t in enumerate(_get(doc, "thermals", "environment", kind=list, default=[])):
        path = f"environment.thermals[{i}]"
        if not isinstance(t, dict):
            raise ConfigError(f"{path}: expected an object")
        thermals.append(_build(
            Thermal, path,
            center_north=_number(t, "center_north", path),
            center_east=_number(t, "center_east", path),
            radius=_number(t, "radius", path),
            core_updraft=_number(t, "core_updraft", path),
            base_height=_number(t, "base_height", path),
            top_height=_number(t, "top_height", path),
        ))

    start_doc = _get(doc, "start", "environment", kind=dict)
    start = _build(
        State, "environment.start",
        north=_number(start_doc, "north", "environment.start"),
        east=_number(start_doc, "east", "environment.start"),
        course=math.radians(_number(start_doc, "course_deg", "environment.start", default=0.0)),
        height=_number(start_doc, "height", "environment.start"),
    )

    goal_doc = _get(doc, "goal", "environment", kind=dict)
    goal = _build(
        GoalRegion, "environment.goal",
        north=_number(goal_doc, "north", "environment.goal"),
        east=_number(goal_doc, "east", "environment.goal"),
        height=_number(goal_doc, "height", "environment.goal"),
        radius=_number(goal_doc, "radius", "environment.goal"),
    )

    bounds_doc = _get(doc, "bounds", "environment", kind=dict)
    n_lo, n_hi = _pair(bounds_doc, "north", "environment.bounds")
    e_lo, e_hi = _pair(bounds_doc, "east", "environment.bounds")
    h_lo, h_hi = _pair(bounds_doc, "height", "environment.bounds")
    bounds = _build(
        WorldBounds, "environment.bounds",
        north_min=n_lo, north_max=n_hi,
        east_min=e_lo, east_max=e_hi,
        height_min=h_lo, height_max=h_hi,
    )

    name = _get(doc, "name", "environment", kind=str, default="unnamed")
    return Environment(
        wind=WindField(ambient=ambient, thermals=tuple(thermals)),
        start=start, goal=goal, bounds=bounds, name=name,
    )


def save_environment(env: Environment) -> str:
    """Serialize an Environment back to its JSON document form."""
    doc = {
        "version": SCHEMA_VERSION,
        "name": env.name,
        "ambient_wind": {
            "north": env.wind.ambient.w_north,
            "east": env.wind.ambient.w_east,
            "down": env.wind.ambient.w_down,
        },
        "thermals": [
            {
                "center_north": t.center_north,
                "center_east": t.center_east,
                "radius": t.radius,
                "core_updraft": t.core_updraft,
                "base_height": t.base_height,
                "top_height": t.top_height,
            }
            for t in env.wind.thermals
        ],
        "start": {
            "north": env.start.north,
            "east": env.start.east,
            "course_deg": math.degrees(env.start.course),
            "height": env.start.height,
        },
        "goal": {
            "north": env.goal.north,
            "east": env.goal.east,
            "height": env.goal.height,
            "radius": env.goal.radius,
        },
        "bounds": {
            "north": [env.bounds.north_min, env.bounds.north_max],
            "east": [env.bounds.east_min, env.bounds.east_max],
            "height": [env.bounds.height_min, env.bounds.height_max],
        },
    }
    return json.dumps(doc, indent=2) + "\n"
