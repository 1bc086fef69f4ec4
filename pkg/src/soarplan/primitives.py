"""The 174-element motion-primitive library and the matching continuous envelope.

Four primitive kinds share two airspeeds (10, 20 m/s) and, except splines,
five flight path angles (-45, -15, 0, 15, 45 deg):

    straight   turn 0                                   2 x 5      = 10
    curve      total turn +-(30, 60, 90) deg            2 x 6 x 5  = 60
    spiral     total turn +-(180, 360, 720, 1080) deg   2 x 8 x 5  = 80
    spline     two unequal half-turns from +-(60, 90),  2 x 12     = 24
               level flight (gamma = 0)

Every primitive spans one segment period T_s split into N equal steps. A
primitive's turn is bookkept as the total turn of each half-segment; the
realized turn rate of a half is its total divided by T_s / 2, so non-spline
kinds hold total_turn / T_s for the whole segment and splines switch rates at
step N/2. The continuous sampler draws one constant control uniformly from
the envelope box spanned by the primitive parameters and holds it for the
same T_s, so both sampling spaces share dynamics and control spans.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import ControlInput, ControlSequence

__all__ = [
    "PrimitiveKind",
    "MotionPrimitive",
    "PrimitiveConfig",
    "ControlEnvelope",
    "AIRSPEEDS",
    "FLIGHT_PATH_ANGLES",
    "enumerate_primitives",
    "to_control_sequence",
    "PrimitiveSampler",
    "ContinuousSampler",
    "make_sampler",
]

AIRSPEEDS = (10.0, 20.0)
FLIGHT_PATH_ANGLES = tuple(math.radians(d) for d in (-45.0, -15.0, 0.0, 15.0, 45.0))
CURVE_TURNS_DEG = (-90.0, -60.0, -30.0, 30.0, 60.0, 90.0)
SPIRAL_TURNS_DEG = (-1080.0, -720.0, -360.0, -180.0, 180.0, 360.0, 720.0, 1080.0)
SPLINE_HALF_TURNS_DEG = (-90.0, -60.0, 60.0, 90.0)

PRIMITIVE_COUNT = 174
KIND_COUNTS = {"straight": 10, "curve": 60, "spiral": 80, "spline": 24}


class PrimitiveKind(enum.Enum):
    STRAIGHT = "straight"
    CURVE = "curve"
    SPIRAL = "spiral"
    SPLINE = "spline"


@dataclass(frozen=True)
class MotionPrimitive:
    """One predefined control pattern, identified by a stable id in [0, 174)."""

    id: int
    kind: PrimitiveKind
    airspeed: float
    turn_first_half: float    # total course change over steps 1..N/2, radians
    turn_second_half: float   # total course change over steps N/2+1..N, radians
    flight_path_angle: float

    def __post_init__(self):
        if self.airspeed not in AIRSPEEDS:
            raise ValueError(f"primitive airspeed must be one of {AIRSPEEDS}")
        if self.kind is PrimitiveKind.STRAIGHT and (self.turn_first_half or self.turn_second_half):
            raise ValueError("straight primitives cannot turn")
        if self.kind in (PrimitiveKind.CURVE, PrimitiveKind.SPIRAL) \
                and self.turn_first_half != self.turn_second_half:
            raise ValueError(f"{self.kind.value} primitives must turn equally in both halves")
        if self.kind is PrimitiveKind.SPLINE:
            if self.turn_first_half == self.turn_second_half:
                raise ValueError("spline primitives need two different half-turns")
            if self.flight_path_angle != 0.0:
                raise ValueError("spline primitives fly level")

    @property
    def total_turn(self) -> float:
        return self.turn_first_half + self.turn_second_half


@dataclass(frozen=True)
class PrimitiveConfig:
    """Segment period and step count shared by every primitive."""

    segment_duration: float = 10.0
    steps_per_segment: int = 10

    def __post_init__(self):
        if not self.segment_duration > 0.0:
            raise ValueError(f"segment_duration must be > 0, got {self.segment_duration}")
        if self.steps_per_segment < 2 or self.steps_per_segment % 2:
            raise ValueError(
                f"steps_per_segment must be even and >= 2, got {self.steps_per_segment}"
            )


@dataclass(frozen=True)
class ControlEnvelope:
    """Axis-aligned hull of the primitive control values, for continuous sampling."""

    airspeed_min: float
    airspeed_max: float
    turn_rate_max: float       # symmetric: turn rate in [-max, max], rad/s
    flight_path_angle_max: float  # symmetric, radians

    @classmethod
    def from_config(cls, cfg: PrimitiveConfig) -> "ControlEnvelope":
        max_total_turn = math.radians(max(abs(d) for d in SPIRAL_TURNS_DEG))
        return cls(
            airspeed_min=min(AIRSPEEDS),
            airspeed_max=max(AIRSPEEDS),
            turn_rate_max=max_total_turn / cfg.segment_duration,
            flight_path_angle_max=max(abs(g) for g in FLIGHT_PATH_ANGLES),
        )

    def contains(self, u: ControlInput) -> bool:
        return (self.airspeed_min <= u.airspeed <= self.airspeed_max
                and abs(u.turn_rate) <= self.turn_rate_max
                and abs(u.flight_path_angle) <= self.flight_path_angle_max)


def enumerate_primitives(cfg: PrimitiveConfig) -> list[MotionPrimitive]:
    """Build the full library with deterministic ids 0..173.

    Blocks are ordered straight, curve, spiral, spline; within a block the
    loops run airspeed-major, then turn value, then flight path angle.
    """
    prims: list[MotionPrimitive] = []

    def add(kind, airspeed, first, second, gamma):
        prims.append(MotionPrimitive(
            id=len(prims), kind=kind, airspeed=airspeed,
            turn_first_half=first, turn_second_half=second, flight_path_angle=gamma,
        ))

    for v in AIRSPEEDS:
        for gamma in FLIGHT_PATH_ANGLES:
            add(PrimitiveKind.STRAIGHT, v, 0.0, 0.0, gamma)
    for v in AIRSPEEDS:
        for turn_deg in CURVE_TURNS_DEG:
            half = math.radians(turn_deg) / 2.0
            for gamma in FLIGHT_PATH_ANGLES:
                add(PrimitiveKind.CURVE, v, half, half, gamma)
    for v in AIRSPEEDS:
        for turn_deg in SPIRAL_TURNS_DEG:
            half = math.radians(turn_deg) / 2.0
            for gamma in FLIGHT_PATH_ANGLES:
                add(PrimitiveKind.SPIRAL, v, half, half, gamma)
    for v in AIRSPEEDS:
        for first_deg in SPLINE_HALF_TURNS_DEG:
            for second_deg in SPLINE_HALF_TURNS_DEG:
                if first_deg == second_deg:
                    continue
                add(PrimitiveKind.SPLINE, v,
                    math.radians(first_deg), math.radians(second_deg), 0.0)

    assert len(prims) == PRIMITIVE_COUNT
    return prims


def to_control_sequence(p: MotionPrimitive, cfg: PrimitiveConfig) -> ControlSequence:
    """Realize a primitive as N equal steps; each half turns at turn/(T_s/2)."""
    n = cfg.steps_per_segment
    half_duration = cfg.segment_duration / 2.0
    rate_first = p.turn_first_half / half_duration
    rate_second = p.turn_second_half / half_duration
    controls = []
    for i in range(n):
        rate = rate_first if i < n // 2 else rate_second
        controls.append(ControlInput(p.airspeed, rate, p.flight_path_angle))
    return ControlSequence(tuple(controls), cfg.segment_duration)


class PrimitiveSampler:
    """Uniform sampling over the primitive library.

    Control matrices for all primitives are precomputed once; `sample_array`
    returns a read-only view for the propagation kernel plus the primitive id.
    """

    kind = "primitive"

    def __init__(self, cfg: PrimitiveConfig, primitives: list[MotionPrimitive] | None = None):
        self.cfg = cfg
        self.primitives = primitives if primitives is not None else enumerate_primitives(cfg)
        if not self.primitives:
            raise ValueError("primitive library is empty")
        self._arrays = np.stack([
            to_control_sequence(p, cfg).as_array() for p in self.primitives
        ])
        self._arrays.setflags(write=False)

    def __len__(self) -> int:
        return len(self.primitives)

    def sample(self, rng: np.random.Generator) -> MotionPrimitive:
        return self.primitives[int(rng.integers(0, len(self.primitives)))]

    def sample_array(self, rng: np.random.Generator) -> tuple[np.ndarray, int]:
        i = int(rng.integers(0, len(self.primitives)))
        return self._arrays[i], i

    def control_array(self, primitive_id: int) -> np.ndarray:
        return self._arrays[primitive_id]


class ContinuousSampler:
    """One constant control drawn uniformly from the envelope box, held for T_s."""

    kind = "continuous"

    def __init__(self, cfg: PrimitiveConfig, envelope: ControlEnvelope | None = None):
        self.cfg = cfg
        self.envelope = envelope if envelope is not None else ControlEnvelope.from_config(cfg)

    def sample(self, rng: np.random.Generator) -> ControlSequence:
        u = self._draw(rng)
        return ControlSequence.constant(u, self.cfg.segment_duration, self.cfg.steps_per_segment)

    def _draw(self, rng: np.random.Generator) -> ControlInput:
        env = self.envelope
        return ControlInput(
            airspeed=rng.uniform(env.airspeed_min, env.airspeed_max),
            turn_rate=rng.uniform(-env.turn_rate_max, env.turn_rate_max),
            flight_path_angle=rng.uniform(-env.flight_path_angle_max, env.flight_path_angle_max),
        )

    def sample_array(self, rng: np.random.Generator) -> tuple[np.ndarray, int]:
        u = self._draw(rng)
        arr = np.empty((self.cfg.steps_per_segment, 3))
        arr[:, 0] = u.airspeed
        arr[:, 1] = u.turn_rate
        arr[:, 2] = u.flight_path_angle
        return arr, -1


def make_sampler(kind: str, cfg: PrimitiveConfig):
    """Sampler factory keyed by the planner config's sampler name."""
    if kind == "primitive":
        return PrimitiveSampler(cfg)
    if kind == "continuous":
        return ContinuousSampler(cfg)
    raise ValueError(f"unknown sampler kind {kind!r} (expected 'primitive' or 'continuous')")
