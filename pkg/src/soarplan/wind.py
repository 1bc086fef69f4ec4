"""Wind field model: constant ambient wind plus parametric thermal updrafts.

Each thermal is a vertical cylinder band [base_height, top_height] carrying a
purely vertical updraft with a Gaussian radial profile,

    w_up(r) = core_updraft * exp(-(r / radius)^2)

where r is the horizontal distance to the thermal center. Outside its band a
thermal contributes nothing; overlapping thermals superpose. The down
component is positive-down, so updrafts make w_down more negative. Fields are
immutable and safe for concurrent reads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["WindVector", "Thermal", "WindField", "wind_at"]


@dataclass(frozen=True)
class WindVector:
    """Wind components in m/s; w_down is positive-down."""

    w_north: float = 0.0
    w_east: float = 0.0
    w_down: float = 0.0

    def __post_init__(self):
        for v in (self.w_north, self.w_east, self.w_down):
            if not math.isfinite(v):
                raise ValueError(f"wind components must be finite, got {v!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.w_north, self.w_east, self.w_down])


@dataclass(frozen=True)
class Thermal:
    """Cylindrical updraft band with a Gaussian radial strength profile."""

    center_north: float
    center_east: float
    radius: float
    core_updraft: float
    base_height: float
    top_height: float

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError(f"thermal radius must be > 0, got {self.radius}")
        if not self.core_updraft > 0.0:
            raise ValueError(f"thermal core_updraft must be > 0, got {self.core_updraft}")
        if not self.base_height < self.top_height:
            raise ValueError(
                f"thermal base_height must be below top_height, "
                f"got [{self.base_height}, {self.top_height}]"
            )

    def updraft_at(self, north: float, east: float, height: float) -> float:
        """Upward flow speed (m/s, >= 0) at a position; zero outside the band."""
        if not (self.base_height <= height <= self.top_height):
            return 0.0
        dn = north - self.center_north
        de = east - self.center_east
        return self.core_updraft * math.exp(-(dn * dn + de * de) / (self.radius * self.radius))


@dataclass(frozen=True)
class WindField:
    """Ambient wind plus a (possibly empty) set of thermals."""

    ambient: WindVector = WindVector()
    thermals: tuple[Thermal, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "thermals", tuple(self.thermals))

    def wind_at(self, north: float, east: float, height: float) -> WindVector:
        wd = self.ambient.w_down
        for t in self.thermals:
            wd -= t.updraft_at(north, east, height)
        return WindVector(self.ambient.w_north, self.ambient.w_east, wd)

    def ambient_array(self) -> np.ndarray:
        return self.ambient.as_array()

    def thermal_array(self) -> np.ndarray:
        """(K, 6) matrix (cn, ce, radius, core, base, top) for the kernels."""
        out = np.empty((len(self.thermals), 6))
        for i, t in enumerate(self.thermals):
            out[i] = (t.center_north, t.center_east, t.radius,
                      t.core_updraft, t.base_height, t.top_height)
        return out

    def max_updraft(self) -> float:
        """Upper bound on the total upward wind anywhere in the field (m/s)."""
        up = max(0.0, -self.ambient.w_down)
        return up + sum(t.core_updraft for t in self.thermals)


def wind_at(field: WindField, north: float, east: float, height: float) -> WindVector:
    """Wind vector at a 3D position (module-level convenience form)."""
    for v in (north, east, height):
        if not math.isfinite(v):
            raise ValueError(f"query position must be finite, got {v!r}")
    return field.wind_at(north, east, height)
