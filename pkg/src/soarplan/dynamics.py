"""Four-degree-of-freedom kinematic point-mass model for a fixed-wing UAS.

The planning state is (north, east, course, height) with height positive-up.
Controls are (airspeed, turn rate, flight path angle) held piecewise constant
over the steps of a control sequence. Kinematics:

    d(north)/dt  = airspeed * cos(course) * cos(gamma) + w_north
    d(east)/dt   = airspeed * sin(course) * cos(gamma) + w_east
    d(course)/dt = turn_rate
    d(height)/dt = airspeed * sin(gamma) - w_down

with the wind vector (w_north, w_east, w_down) sampled from the field at the
aircraft's instantaneous 3D position (w_down is positive-down, so an updraft
has w_down < 0 and increases height).

Propagation is fixed-step RK4, wind re-sampled at every RK stage position,
course wrapped to [-pi, pi) after every substep. All functions are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .wind import WindField, WindVector

__all__ = [
    "State",
    "ControlInput",
    "ControlSequence",
    "StateRate",
    "TrajectorySegment",
    "PropagationError",
    "HeightFloorError",
    "wrap_angle",
    "state_derivative",
    "ground_velocity",
    "propagate",
]


class PropagationError(RuntimeError):
    """A control sequence could not be propagated to a usable segment."""


class HeightFloorError(PropagationError):
    """The trajectory dipped below the configured height floor.

    Signals a prunable segment, not a programming error.
    """


def wrap_angle(x: float) -> float:
    """Wrap an angle to [-pi, pi). Idempotent on already-wrapped values."""
    return (x + math.pi) % _kernels.TWO_PI - math.pi


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class State:
    """Planning state: position in meters, course angle in radians, height positive-up."""

    north: float
    east: float
    course: float
    height: float

    def __post_init__(self):
        _require_finite("State", self.north, self.east, self.course, self.height)
        object.__setattr__(self, "course", wrap_angle(self.course))

    def as_array(self) -> np.ndarray:
        return np.array([self.north, self.east, self.course, self.height])

    @classmethod
    def from_array(cls, a) -> "State":
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))


@dataclass(frozen=True)
class ControlInput:
    """One control triple: airspeed (m/s), turn rate (rad/s), flight path angle (rad)."""

    airspeed: float
    turn_rate: float
    flight_path_angle: float

    def __post_init__(self):
        _require_finite("ControlInput", self.airspeed, self.turn_rate, self.flight_path_angle)
        if self.airspeed <= 0.0:
            raise ValueError(f"airspeed must be > 0, got {self.airspeed}")
        if abs(self.flight_path_angle) > math.pi / 2:
            raise ValueError(
                f"flight_path_angle must be within [-pi/2, pi/2], got {self.flight_path_angle}"
            )


@dataclass(frozen=True)
class StateRate:
    """Time derivative of a State."""

    d_north: float
    d_east: float
    d_course: float
    d_height: float


@dataclass(frozen=True)
class ControlSequence:
    """N equal-duration control steps spanning a fixed segment period."""

    controls: tuple[ControlInput, ...]
    total_duration: float

    def __post_init__(self):
        if len(self.controls) < 2:
            raise ValueError("a control sequence needs at least 2 steps")
        if not (math.isfinite(self.total_duration) and self.total_duration > 0.0):
            raise ValueError(f"total_duration must be positive, got {self.total_duration}")

    @property
    def n_steps(self) -> int:
        return len(self.controls)

    @property
    def step_duration(self) -> float:
        return self.total_duration / self.n_steps

    @property
    def steps(self) -> tuple[tuple[ControlInput, float], ...]:
        dt = self.step_duration
        return tuple((u, dt) for u in self.controls)

    def as_array(self) -> np.ndarray:
        """(N, 3) control matrix for the integration kernel."""
        out = np.empty((self.n_steps, 3))
        for i, u in enumerate(self.controls):
            out[i, 0] = u.airspeed
            out[i, 1] = u.turn_rate
            out[i, 2] = u.flight_path_angle
        return out

    @classmethod
    def constant(cls, u: ControlInput, total_duration: float, n_steps: int) -> "ControlSequence":
        return cls((u,) * n_steps, total_duration)


@dataclass(frozen=True, eq=False)
class TrajectorySegment:
    """One propagated segment: integration knots plus the controls that produced them."""

    times: np.ndarray          # (N+1,) seconds from segment start
    knots: np.ndarray          # (N+1, 4) state at each knot
    controls: ControlSequence
    substeps_per_step: int = 10

    @property
    def start_state(self) -> State:
        return State.from_array(self.knots[0])

    @property
    def end_state(self) -> State:
        return State.from_array(self.knots[-1])

    @property
    def states(self) -> tuple[tuple[float, State], ...]:
        return tuple(
            (float(t), State.from_array(k)) for t, k in zip(self.times, self.knots)
        )

    @property
    def duration(self) -> float:
        return self.controls.total_duration


def state_derivative(s: State, u: ControlInput, w: WindVector) -> StateRate:
    """Kinematic state rate for one control input under a fixed wind vector."""
    _require_finite("wind", w.w_north, w.w_east, w.w_down)
    dn, de, dc, dh = _kernels.state_rate.py_func(
        s.course, u.airspeed, u.turn_rate, u.flight_path_angle,
        w.w_north, w.w_east, w.w_down,
    )
    return StateRate(dn, de, dc, dh)


def ground_velocity(s: State, u: ControlInput, w: WindVector) -> tuple[tuple[float, float, float], float]:
    """Inertial velocity vector (north, east, climb) and its Euclidean norm."""
    rate = state_derivative(s, u, w)
    v = (rate.d_north, rate.d_east, rate.d_height)
    return v, math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])


_NO_BOUNDS = np.array([[-np.inf, np.inf], [-np.inf, np.inf], [-np.inf, np.inf]])

_STATUS_MESSAGES = {
    _kernels.STATUS_FLOOR: "height dropped below the floor",
    _kernels.STATUS_BOUNDS: "trajectory left the world bounds",
    _kernels.STATUS_NONFINITE: "propagation produced a non-finite state",
}


def propagate(
    s0: State,
    seq: ControlSequence,
    field: WindField,
    substeps_per_step: int = 10,
    h_min: float | None = None,
) -> TrajectorySegment:
    """Propagate a control sequence from `s0` through `field` with fixed-step RK4.

    `substeps_per_step` RK4 steps are taken per control step; wind is
    sampled at the position of every RK stage. Raises HeightFloorError if
    the height drops below `h_min` (None disables the floor).
    """
    if substeps_per_step < 1:
        raise ValueError("substeps_per_step must be >= 1")
    floor = -math.inf if h_min is None else float(h_min)
    knots, status = _kernels.rk4_propagate(
        s0.as_array(),
        seq.as_array(),
        seq.step_duration,
        substeps_per_step,
        field.ambient_array(),
        field.thermal_array(),
        floor,
        _NO_BOUNDS,
    )
    if status == _kernels.STATUS_FLOOR:
        raise HeightFloorError(f"height dropped below floor {floor} m")
    if status != _kernels.STATUS_OK:
        raise PropagationError(_STATUS_MESSAGES.get(status, f"status {status}"))
    times = np.linspace(0.0, seq.total_duration, seq.n_steps + 1)
    return TrajectorySegment(times, knots, seq, substeps_per_step)
