"""Specific-energy cost model: drag polar, thrust closure, fuel rate, edge cost.

The cost of flying a segment is the negated specific-energy rate integrated
per ground distance,

    edot = g * hdot + efuel_dot        (airspeed is constant per step, so the
                                        kinetic term v_a * dv_a/dt drops)
    cost = sum_k (-edot_k / v_g_k) * (v_g_k * dt)

where hdot comes from the realized height change between integration knots
and the fuel rate from the point-mass thrust closure

    T_x = D + m g sin(gamma)           (clamped at 0: no regeneration)
    T_z = L - m g cos(gamma) / cos(phi)
    T   = sqrt(T_x^2 + T_z^2)          (no side force)
    efuel_dot = -T v_a / (m g eta_ec eta_p)

with the drag polar L = q S C_L0, D = q S (C_D0 + C_L0^2 / (pi AR e)),
q = 0.5 rho(h) v_a^2, and the coordinated-turn bank phi = atan(v_a chi_dot / g)
clamped to +-80 deg. Density follows the troposphere model
rho(h) = 1.225 (1 - 2.2558e-5 h)^4.2559.

Raw segment costs are negative where updrafts add more potential energy than
the fuel burn costs; planners that need nonnegative edge weights add a
per-distance offset (see `cost_offset_per_meter`), which shifts every path's
cost by offset * path length and is reported alongside the raw value.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dynamics import TrajectorySegment
from .environment import ConfigError
from .wind import WindField

__all__ = [
    "AircraftParams",
    "ForceSet",
    "SegmentEnergy",
    "DegenerateSegmentError",
    "BANK_LIMIT",
    "air_density",
    "lift_drag",
    "bank_angle",
    "thrust",
    "fuel_rate",
    "segment_cost",
    "cost_offset_per_meter",
    "load_aircraft",
    "save_aircraft",
]

log = logging.getLogger(__name__)

BANK_LIMIT = math.radians(80.0)

AIRCRAFT_SCHEMA_VERSION = 1


class DegenerateSegmentError(ValueError):
    """Ground speed fell below the minimum; per-distance cost is undefined."""


@dataclass(frozen=True)
class AircraftParams:
    """Airframe and efficiency constants for the energy model.

    Defaults describe a small fixed-wing UAS of the Tempest class; they are
    artifact defaults, not measured data, and every value can be overridden
    through the aircraft config file.
    """

    mass: float = 5.74            # kg
    wing_area: float = 0.63       # m^2
    cl0: float = 0.6
    cd0: float = 0.03
    aspect_ratio: float = 10.0
    oswald_factor: float = 0.9
    eta_ec: float = 0.8           # energy-source-to-shaft efficiency
    eta_p: float = 1.0            # propeller efficiency
    gravity: float = 9.81         # m/s^2

    def __post_init__(self):
        for name in ("mass", "wing_area", "cl0", "cd0", "aspect_ratio",
                     "oswald_factor", "gravity"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        for name in ("eta_ec", "eta_p"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must be in (0, 1], got {v}")

    def as_tuple(self) -> tuple[float, ...]:
        """Kernel argument order: see `_kernels.segment_cost`."""
        return (self.mass, self.wing_area, self.cl0, self.cd0,
                self.aspect_ratio, self.oswald_factor,
                self.eta_ec, self.eta_p, self.gravity)


@dataclass(frozen=True)
class ForceSet:
    """Forces at one flight condition; thrust has no side component."""

    lift: float
    drag: float
    thrust_x: float
    thrust_z: float
    thrust: float
    dynamic_pressure: float   # Pa, 0.5 rho v^2 (wing area applied in L and D)
    bank: float


@dataclass(frozen=True, eq=False)
class SegmentEnergy:
    """Energy bookkeeping for one propagated segment.

    Per-step arrays align with the segment's control steps. `raw_cost` is the
    integrated per-distance cost (negative when energy was harvested);
    `offset_cost` adds the configured per-meter offset so planners see
    nonnegative edge weights.
    """

    raw_cost: float
    offset_cost: float
    ground_distance: float
    duration: float
    energy_rate_steps: np.ndarray   # edot per step
    fuel_rate_steps: np.ndarray
    height_rate_steps: np.ndarray   # g * hdot per step
    ground_speed_steps: np.ndarray

    @property
    def energy_rate(self) -> float:
        """Time-averaged specific energy rate over the segment."""
        return float(np.mean(self.energy_rate_steps))

    @property
    def fuel_rate(self) -> float:
        return float(np.mean(self.fuel_rate_steps))

    @property
    def height_rate(self) -> float:
        return float(np.mean(self.height_rate_steps))


def air_density(height: float) -> float:
    """Troposphere density (kg/m^3); valid for heights in [-500, 11000] m."""
    if not -500.0 <= height <= 11000.0:
        raise ValueError(f"height outside density model range [-500, 11000] m: {height}")
    return _kernels.RHO_SEA_LEVEL * (1.0 - _kernels.DENSITY_LAPSE * height) ** _kernels.DENSITY_EXPONENT


def lift_drag(v_a: float, height: float, p: AircraftParams) -> tuple[float, float, float]:
    """Lift (N), drag (N) and dynamic pressure (Pa) from the polar model."""
    if not v_a > 0.0:
        raise ValueError(f"airspeed must be > 0, got {v_a}")
    q = 0.5 * v_a * v_a * air_density(height)
    lift = q * p.wing_area * p.cl0
    drag = q * p.wing_area * (p.cd0 + p.cl0 * p.cl0 / (math.pi * p.aspect_ratio * p.oswald_factor))
    return lift, drag, q


def bank_angle(v_a: float, turn_rate: float, gravity: float = 9.81) -> float:
    """Coordinated-turn bank phi = atan(v_a * turn_rate / g), clamped to +-80 deg."""
    if not v_a > 0.0:
        raise ValueError(f"airspeed must be > 0, got {v_a}")
    phi = math.atan(v_a * turn_rate / gravity)
    if abs(phi) > BANK_LIMIT:
        clamped = math.copysign(BANK_LIMIT, phi)
        log.warning(
            "bank angle %.1f deg exceeds the coordinated-turn clamp, using %.1f deg",
            math.degrees(phi), math.degrees(clamped),
        )
        return clamped
    return phi


def thrust(v_a: float, gamma: float, phi: float, height: float, p: AircraftParams) -> ForceSet:
    """Thrust components from the point-mass closure at constant v_a and gamma."""
    if abs(phi) >= math.radians(89.0):
        raise ValueError(f"bank angle too close to 90 deg for the thrust closure: {phi}")
    lift, drag, q = lift_drag(v_a, height, p)
    t_x = drag + p.mass * p.gravity * math.sin(gamma)
    if t_x < 0.0:
        t_x = 0.0
    t_z = lift - p.mass * p.gravity * math.cos(gamma) / math.cos(phi)
    return ForceSet(
        lift=lift, drag=drag,
        thrust_x=t_x, thrust_z=t_z,
        thrust=math.sqrt(t_x * t_x + t_z * t_z),
        dynamic_pressure=q, bank=phi,
    )


def fuel_rate(t: float, v_a: float, p: AircraftParams) -> float:
    """Specific fuel power -T v_a / (m g eta_ec eta_p); always <= 0.

    Negative thrust inputs are clamped to zero: the fuel model has no
    regeneration path.
    """
    t = max(t, 0.0)
    return -t * v_a / (p.mass * p.gravity * p.eta_ec * p.eta_p)


def segment_cost(
    seg: TrajectorySegment,
    field: WindField,
    p: AircraftParams,
    cost_offset: float = 0.0,
    v_g_min: float = 0.1,
) -> SegmentEnergy:
    """Energy ledger and traversal cost for one propagated segment."""
    status, raw, dist, edot, fuel, height_rate, vg = _kernels.segment_cost(
        seg.knots,
        seg.controls.as_array(),
        seg.controls.step_duration,
        field.ambient_array(),
        field.thermal_array(),
        *p.as_tuple(),
        v_g_min,
        BANK_LIMIT,
    )
    if status == _kernels.STATUS_DEGENERATE:
        raise DegenerateSegmentError(f"ground speed fell below {v_g_min} m/s")
    if status == _kernels.STATUS_DENSITY:
        raise ValueError("segment height left the density model's validity range")
    return SegmentEnergy(
        raw_cost=float(raw),
        offset_cost=float(raw + cost_offset * dist),
        ground_distance=float(dist),
        duration=seg.duration,
        energy_rate_steps=edot,
        fuel_rate_steps=fuel,
        height_rate_steps=height_rate,
        ground_speed_steps=vg,
    )


def cost_offset_per_meter(
    field: WindField,
    airspeed_min: float,
    flight_path_angle_max: float,
    gravity: float = 9.81,
) -> float:
    """Per-meter cost offset that makes every achievable edge cost nonnegative.

    The most energy gained per meter of ground track is bounded by
    g * hdot / v_g, maximized at the slowest airspeed, steepest climb, the
    strongest possible total updraft, and ambient wind cancelling as much
    horizontal motion as possible. Since hdot is one component of the ground
    velocity the ratio never exceeds g, which this bound degrades to when
    the ambient wind can cancel the horizontal airspeed entirely.
    """
    w_up = field.max_updraft()
    w_horizontal = math.hypot(field.ambient.w_north, field.ambient.w_east)
    climb = airspeed_min * math.sin(flight_path_angle_max) + w_up
    horizontal = max(airspeed_min * math.cos(flight_path_angle_max) - w_horizontal, 0.0)
    if climb <= 0.0:
        return 0.0
    return gravity * climb / math.hypot(horizontal, climb)


def load_aircraft(text: str) -> AircraftParams:
    """Parse and validate an aircraft parameter document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"aircraft config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("aircraft config must be a JSON object")
    version = doc.get("version")
    if version != AIRCRAFT_SCHEMA_VERSION:
        raise ConfigError(f"aircraft.version: expected {AIRCRAFT_SCHEMA_VERSION}, got {version!r}")
    kwargs = {}
    for key in ("mass", "wing_area", "cl0", "cd0", "aspect_ratio",
                "oswald_factor", "eta_ec", "eta_p", "gravity"):
        if key in doc:
            v = doc[key]
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"aircraft.{key}: expected a finite number, got {v!r}")
            kwargs[key] = float(v)
    try:
        return AircraftParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"aircraft: {exc}") from exc


def save_aircraft(p: AircraftParams) -> str:
    doc = {
        "version": AIRCRAFT_SCHEMA_VERSION,
        "mass": p.mass,
        "wing_area": p.wing_area,
        "cl0": p.cl0,
        "cd0": p.cd0,
        "aspect_ratio": p.aspect_ratio,
        "oswald_factor": p.oswald_factor,
        "eta_ec": p.eta_ec,
        "eta_p": p.eta_p,
        "gravity": p.gravity,
    }
    return json.dumps(doc, indent=2) + "\n"
