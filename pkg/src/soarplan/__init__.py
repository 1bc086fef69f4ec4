"""soarplan: energy-aware kinodynamic planning for fixed-wing UAS in updraft fields.

A 4-DOF point-mass model is propagated through a wind field of thermal
updrafts; a Stable Sparse RRT planner minimizes specific-energy cost using
either a 174-element motion-primitive library or a matched continuous
control space, and a benchmark harness compares the two.
"""

from .bench import ExperimentSpec, RunRecord, SummaryStats, run_experiment, summarize
from .dynamics import (
    ControlInput,
    ControlSequence,
    State,
    StateRate,
    TrajectorySegment,
    ground_velocity,
    propagate,
    state_derivative,
    wrap_angle,
)
from .energy import (
    AircraftParams,
    ForceSet,
    SegmentEnergy,
    air_density,
    bank_angle,
    cost_offset_per_meter,
    fuel_rate,
    lift_drag,
    segment_cost,
    thrust,
)
from .environment import (
    ConfigError,
    Environment,
    GoalRegion,
    WorldBounds,
    load_environment,
    save_environment,
)
from .planner import (
    PlannerConfig,
    PlanResult,
    PlanStatus,
    SolutionPath,
    SstPlanner,
    distance,
    load_planner_config,
    sst_plan,
)
from .primitives import (
    ContinuousSampler,
    ControlEnvelope,
    MotionPrimitive,
    PrimitiveConfig,
    PrimitiveKind,
    PrimitiveSampler,
    enumerate_primitives,
    make_sampler,
    to_control_sequence,
)
from .spatial import GridIndex, MetricWeights
from .wind import Thermal, WindField, WindVector, wind_at

__version__ = "0.1.0"

__all__ = [
    "AircraftParams",
    "ConfigError",
    "ContinuousSampler",
    "ControlEnvelope",
    "ControlInput",
    "ControlSequence",
    "Environment",
    "ExperimentSpec",
    "ForceSet",
    "GoalRegion",
    "GridIndex",
    "MetricWeights",
    "MotionPrimitive",
    "PlanResult",
    "PlanStatus",
    "PlannerConfig",
    "PrimitiveConfig",
    "PrimitiveKind",
    "PrimitiveSampler",
    "RunRecord",
    "SegmentEnergy",
    "SolutionPath",
    "SstPlanner",
    "State",
    "StateRate",
    "SummaryStats",
    "Thermal",
    "TrajectorySegment",
    "WindField",
    "WindVector",
    "WorldBounds",
    "air_density",
    "bank_angle",
    "cost_offset_per_meter",
    "distance",
    "enumerate_primitives",
    "fuel_rate",
    "ground_velocity",
    "lift_drag",
    "load_environment",
    "load_planner_config",
    "make_sampler",
    "propagate",
    "run_experiment",
    "save_environment",
    "segment_cost",
    "sst_plan",
    "state_derivative",
    "summarize",
    "thrust",
    "to_control_sequence",
    "wind_at",
    "wrap_angle",
]
