"""Stable Sparse RRT over the 4-DOF state space with energy edge costs.

Each iteration samples a state, selects the cheapest active node within the
selection radius (BestNear; nearest active node as fallback), propagates one
randomly sampled control segment from it, and keeps the new node only if it
is the best-known way into its local witness region:

    - no witness within delta_s: a new witness is created around the node;
    - nearest witness's representative costs more: the node replaces it, the
      old representative is deactivated and pruned up through childless
      inactive ancestors;
    - otherwise the propagation is discarded.

Edge weights are offset energy costs (raw cost plus a per-meter offset that
keeps them nonnegative, see `energy.cost_offset_per_meter`); raw costs are
carried alongside and reported in all outputs. The best goal-reaching path
is snapshotted whenever it improves, so later pruning cannot lose it.

A planner instance owns its tree, witnesses and random stream and must be
driven by one thread; independent runs can execute concurrently.
"""

from __future__ import annotations

import enum
import json
import math
import time
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .dynamics import State
from .energy import BANK_LIMIT, AircraftParams, cost_offset_per_meter
from .environment import ConfigError, Environment
from .primitives import (
    ContinuousSampler,
    ControlEnvelope,
    PrimitiveConfig,
    PrimitiveSampler,
    make_sampler,
)
from .spatial import GridIndex, MetricWeights, metric_distance

__all__ = [
    "PlannerConfig",
    "PlanStatus",
    "SolutionSegment",
    "SolutionPath",
    "PlanResult",
    "SstPlanner",
    "distance",
    "sst_plan",
    "load_planner_config",
    "save_planner_config",
    "override_config",
]

PLANNER_SCHEMA_VERSION = 1

_RNG_BATCH = 4096


def distance(a: State, b: State, weights: MetricWeights) -> float:
    """Weighted state-space metric used for selection and witness radii."""
    return metric_distance(
        (a.north, a.east, a.course, a.height),
        (b.north, b.east, b.course, b.height),
        weights,
    )


@dataclass(frozen=True)
class PlannerConfig:
    """Knobs of one planning run; ships with defaults sized to the primitive set."""

    delta_bn: float = 60.0        # BestNear selection radius (metric units)
    delta_s: float = 30.0         # witness sparsification radius
    weight_position: float = 1.0
    weight_height: float = 1.0
    weight_course: float = 25.0   # m^2/rad^2
    goal_bias: float = 0.05
    segment_duration: float = 10.0
    steps_per_segment: int = 10
    substeps_per_step: int = 10
    v_g_min: float = 0.1
    h_min: float = 0.0
    cost_offset: float | None = None   # per-meter; None derives it from the field
    sampler: str = "primitive"
    seed: int = 0
    iterations: int | None = 200_000
    seconds: float | None = None

    def __post_init__(self):
        if not 0.0 < self.delta_s < self.delta_bn:
            raise ValueError(
                f"witness radius must satisfy 0 < delta_s < delta_bn, "
                f"got delta_s={self.delta_s}, delta_bn={self.delta_bn}"
            )
        if not 0.0 <= self.goal_bias < 1.0:
            raise ValueError(f"goal_bias must be in [0, 1), got {self.goal_bias}")
        if self.sampler not in ("primitive", "continuous"):
            raise ValueError(f"sampler must be 'primitive' or 'continuous', got {self.sampler!r}")
        if self.substeps_per_step < 1:
            raise ValueError("substeps_per_step must be >= 1")
        if not self.v_g_min > 0.0:
            raise ValueError("v_g_min must be > 0")
        if self.iterations is None and self.seconds is None:
            raise ValueError("set an iteration or wall-clock budget")
        if self.iterations is not None and self.iterations <= 0:
            raise ValueError(f"iterations budget must be > 0, got {self.iterations}")
        if self.seconds is not None and self.seconds <= 0.0:
            raise ValueError(f"seconds budget must be > 0, got {self.seconds}")
        # PrimitiveConfig re-checks T_s and N
        PrimitiveConfig(self.segment_duration, self.steps_per_segment)

    @property
    def weights(self) -> MetricWeights:
        return MetricWeights(self.weight_position, self.weight_height, self.weight_course)

    @property
    def primitive_config(self) -> PrimitiveConfig:
        return PrimitiveConfig(self.segment_duration, self.steps_per_segment)


class PlanStatus(enum.Enum):
    SOLVED = "solved"
    NO_SOLUTION = "no_solution"


@dataclass(frozen=True, eq=False)
class SolutionSegment:
    """One edge of the solution: its controls, knots and energy ledger."""

    tag: int                  # primitive id, or -1 for a continuous control
    controls: np.ndarray      # (N, 3)
    times: np.ndarray         # (N+1,) seconds from path start
    knots: np.ndarray         # (N+1, 4)
    energy_rate_steps: np.ndarray
    raw_cost: float
    offset_cost: float
    ground_distance: float


@dataclass(frozen=True, eq=False)
class SolutionPath:
    segments: tuple[SolutionSegment, ...]
    raw_cost: float
    offset_cost: float
    flight_time: float

    @property
    def depth(self) -> int:
        return len(self.segments)

    @property
    def end_state(self) -> State:
        if not self.segments:
            return self.start_state
        return State.from_array(self.segments[-1].knots[-1])

    @property
    def start_state(self) -> State:
        if not self.segments:
            raise ValueError("zero-length path has no stored states; use the planner's start")
        return State.from_array(self.segments[0].knots[0])


@dataclass(frozen=True, eq=False)
class PlanResult:
    status: PlanStatus
    solution: SolutionPath | None
    raw_cost: float | None
    offset_cost: float | None
    flight_time: float | None
    iterations: int
    active_nodes: int
    tree_nodes: int
    witnesses: int
    wall_seconds: float
    iterations_per_second: float
    sampler: str
    seed: int
    cost_offset: float
    best_history: tuple[tuple[int, float], ...]

    @property
    def solved(self) -> bool:
        return self.status is PlanStatus.SOLVED


class SstPlanner:
    """One SST planning run over an environment.

    The tree is stored struct-of-arrays; node ids grow monotonically and
    parents always precede children, which keeps the parent graph acyclic by
    construction. Active nodes live in a grid index for BestNear; witnesses
    live in a second index and are never removed.
    """

    def __init__(
        self,
        env: Environment,
        cfg: PlannerConfig,
        sampler=None,
        aircraft: AircraftParams | None = None,
    ):
        self.env = env
        self.cfg = cfg
        self.aircraft = aircraft if aircraft is not None else AircraftParams()
        self.sampler = sampler if sampler is not None else make_sampler(
            cfg.sampler, cfg.primitive_config
        )
        self.weights = cfg.weights
        self.rng = np.random.default_rng(cfg.seed)

        if not env.bounds.contains_state(env.start):
            raise ConfigError("environment.start: outside the world bounds")
        if env.start.height < cfg.h_min:
            raise ConfigError(
                f"environment.start: height {env.start.height} below the floor {cfg.h_min}"
            )

        self._ambient = env.wind.ambient_array()
        self._thermals = env.wind.thermal_array()
        self._bounds = env.bounds.as_array()
        self._aircraft_args = self.aircraft.as_tuple()
        envelope = ControlEnvelope.from_config(cfg.primitive_config)
        self.cost_offset = (
            cfg.cost_offset if cfg.cost_offset is not None
            else cost_offset_per_meter(
                env.wind, envelope.airspeed_min, envelope.flight_path_angle_max,
                self.aircraft.gravity,
            )
        )

        w_pos_root = math.sqrt(self.weights.position)
        self._node_index = GridIndex(cfg.delta_bn / w_pos_root, self.weights)
        self._witness_index = GridIndex(cfg.delta_s / w_pos_root, self.weights)

        cap = 1024
        self._states = np.empty((cap, 4))
        self._parent = np.full(cap, -1, dtype=np.int64)
        self._depth = np.zeros(cap, dtype=np.int32)
        self._offset_cost = np.zeros(cap)
        self._raw_cost = np.zeros(cap)
        self._tag = np.full(cap, -1, dtype=np.int32)
        self._cont_controls = np.zeros((cap, 3))
        self._children = np.zeros(cap, dtype=np.int32)
        self._active = np.zeros(cap, dtype=bool)
        self._in_tree = np.zeros(cap, dtype=bool)
        self._node_count = 0
        self._next_id = 0
        self._wit_rep: list[int] = []
        self._wit_states: list[np.ndarray] = []

        root = self._alloc_node()
        self._states[root] = env.start.as_array()
        self._parent[root] = -1
        self._active[root] = True
        self._in_tree[root] = True
        self._node_count = 1
        self._node_index.insert(root, self._states[root])
        self._new_witness(self._states[root], root)

        self.iterations = 0
        self.best_node = -1
        self.best_offset = math.inf
        self.best_solution: SolutionPath | None = None
        self.best_history: list[tuple[int, float]] = []
        self._start_in_goal = env.goal.contains(env.start)
        if self._start_in_goal:
            self.best_node = root
            self.best_offset = 0.0
            self.best_solution = SolutionPath((), 0.0, 0.0, 0.0)
            self.best_history.append((0, 0.0))

        self._batch_cursor = _RNG_BATCH  # trigger refill on first use
        self._is_primitive = isinstance(self.sampler, PrimitiveSampler)
        self._step_dt = cfg.segment_duration / cfg.steps_per_segment
        self._scratch_controls = np.empty((cfg.steps_per_segment, 3))

    # ------------------------------------------------------------------ tree

    def _alloc_node(self) -> int:
        nid = self._next_id
        if nid >= self._states.shape[0]:
            self._grow(2 * self._states.shape[0])
        self._next_id += 1
        return nid

    def _grow(self, cap: int) -> None:
        def expand(a, fill=0):
            out = np.full((cap,) + a.shape[1:], fill, dtype=a.dtype)
            out[: a.shape[0]] = a
            return out

        self._states = expand(self._states)
        self._parent = expand(self._parent, -1)
        self._depth = expand(self._depth)
        self._offset_cost = expand(self._offset_cost)
        self._raw_cost = expand(self._raw_cost)
        self._tag = expand(self._tag, -1)
        self._cont_controls = expand(self._cont_controls)
        self._children = expand(self._children)
        self._active = expand(self._active)
        self._in_tree = expand(self._in_tree)

    def _new_witness(self, state: np.ndarray, rep: int) -> int:
        wid = len(self._wit_rep)
        self._wit_rep.append(rep)
        self._wit_states.append(np.array(state[:4]))
        self._witness_index.insert(wid, state)
        return wid

    # --------------------------------------------------------------- queries

    def best_near(self, q) -> int:
        """Cheapest active node within delta_bn of q, else the nearest active node."""
        nid = self._node_index.best_cost_within(q, self.cfg.delta_bn, self._offset_cost)
        if nid >= 0:
            return nid
        nid, _ = self._node_index.nearest(q)
        return nid

    def _sample_state(self, bias: float, scaled: np.ndarray) -> tuple[float, float, float, float]:
        if bias < self.cfg.goal_bias:
            goal = self.env.goal
            return (goal.north, goal.east, scaled[2], goal.height)
        return (scaled[0], scaled[1], scaled[2], scaled[3])

    # ----------------------------------------------------------------- loop

    def _refill_batches(self) -> None:
        self._bias_batch = self.rng.random(_RNG_BATCH)
        u = self.rng.random((_RNG_BATCH, 4))
        b = self.env.bounds
        u[:, 0] = b.north_min + u[:, 0] * (b.north_max - b.north_min)
        u[:, 1] = b.east_min + u[:, 1] * (b.east_max - b.east_min)
        u[:, 2] = -math.pi + u[:, 2] * (2.0 * math.pi)
        u[:, 3] = b.height_min + u[:, 3] * (b.height_max - b.height_min)
        self._state_batch = u
        if self._is_primitive:
            self._ctrl_batch = self.rng.integers(0, len(self.sampler), _RNG_BATCH)
        else:
            env = self.sampler.envelope
            c = self.rng.random((_RNG_BATCH, 3))
            c[:, 0] = env.airspeed_min + c[:, 0] * (env.airspeed_max - env.airspeed_min)
            c[:, 1] = -env.turn_rate_max + c[:, 1] * (2.0 * env.turn_rate_max)
            c[:, 2] = (-env.flight_path_angle_max
                       + c[:, 2] * (2.0 * env.flight_path_angle_max))
            self._ctrl_batch = c
        self._batch_cursor = 0

    def step(self) -> bool:
        """Run one SST iteration; returns True if a node was added."""
        if self._batch_cursor >= _RNG_BATCH:
            self._refill_batches()
        cur = self._batch_cursor
        self._batch_cursor += 1
        self.iterations += 1

        q = self._sample_state(self._bias_batch[cur], self._state_batch[cur])
        sel = self.best_near(q)

        if self._is_primitive:
            tag = int(self._ctrl_batch[cur])
            controls = self.sampler.control_array(tag)
            triple = None
        else:
            tag = -1
            triple = self._ctrl_batch[cur]
            controls = self._scratch_controls
            controls[:, 0] = triple[0]
            controls[:, 1] = triple[1]
            controls[:, 2] = triple[2]

        status, n, e, chi, h, raw, dist = _kernels.propagate_and_cost(
            self._states[sel], controls, self._step_dt, self.cfg.substeps_per_step,
            self._ambient, self._thermals, self.cfg.h_min, self._bounds,
            *self._aircraft_args, self.cfg.v_g_min, BANK_LIMIT,
        )
        if status != _kernels.STATUS_OK:
            return False
        seg_offset = raw + self.cost_offset * dist
        return self._consider(sel, (n, e, chi, h), raw, seg_offset, tag, triple) >= 0

    def _consider(self, sel: int, end: np.ndarray, raw_seg: float,
                  offset_seg: float, tag: int, cont_control=None) -> int:
        """Witness check; adds the node and returns its id, or -1 if rejected."""
        new_offset = self._offset_cost[sel] + offset_seg
        wid, _ = self._witness_index.nearest_within(end, self.cfg.delta_s)
        replaced = -1
        if wid >= 0:
            replaced = self._wit_rep[wid]
            if not new_offset < self._offset_cost[replaced]:
                return -1

        nid = self._alloc_node()
        self._states[nid] = end
        self._parent[nid] = sel
        self._depth[nid] = self._depth[sel] + 1
        self._offset_cost[nid] = new_offset
        self._raw_cost[nid] = self._raw_cost[sel] + raw_seg
        self._tag[nid] = tag
        if tag < 0:
            if cont_control is None:
                raise ValueError("a continuous-control node needs its control triple")
            self._cont_controls[nid] = cont_control
        self._children[sel] += 1
        self._active[nid] = True
        self._in_tree[nid] = True
        self._node_count += 1
        self._node_index.insert(nid, end)

        if wid < 0:
            self._new_witness(end, nid)
        else:
            self._wit_rep[wid] = nid
            self._deactivate(replaced)

        goal = self.env.goal
        dn = end[0] - goal.north
        de = end[1] - goal.east
        dh = end[3] - goal.height
        if dn * dn + de * de + dh * dh <= goal.radius * goal.radius \
                and new_offset < self.best_offset:
            self.best_node = nid
            self.best_offset = new_offset
            self.best_solution = self.extract_solution(nid)
            self.best_history.append((self.iterations, new_offset))
        return nid

    def _deactivate(self, nid: int) -> None:
        self._active[nid] = False
        self._node_index.remove(nid)
        x = nid
        while x != 0 and not self._active[x] and self._children[x] == 0:
            p = int(self._parent[x])
            self._in_tree[x] = False
            self._node_count -= 1
            self._children[p] -= 1
            x = p

    # ------------------------------------------------------------- solutions

    def extract_solution(self, node_id: int) -> SolutionPath:
        """Re-propagate the parent chain of a goal node into a solution path.

        Segments are rebuilt with the same kernels and inputs that grew the
        tree, so knots and costs match the stored node ledger exactly.
        """
        chain: list[int] = []
        nid = node_id
        while self._parent[nid] >= 0:
            chain.append(nid)
            nid = int(self._parent[nid])
        if nid != 0:
            raise AssertionError("solution chain does not reach the root")
        chain.reverse()

        cfg = self.cfg
        step_dt = cfg.segment_duration / cfg.steps_per_segment
        state = self._states[0].copy()
        t0 = 0.0
        segments = []
        for nid in chain:
            tag = int(self._tag[nid])
            if tag >= 0:
                controls = self.sampler.control_array(tag)
            else:
                controls = np.tile(self._cont_controls[nid], (cfg.steps_per_segment, 1))
            knots, status = _kernels.rk4_propagate(
                state, controls, step_dt, cfg.substeps_per_step,
                self._ambient, self._thermals, cfg.h_min, self._bounds,
            )
            if status != _kernels.STATUS_OK:
                raise AssertionError("stored edge failed to re-propagate")
            status, raw, dist, edot, _, _, _ = _kernels.segment_cost(
                knots, controls, step_dt, self._ambient, self._thermals,
                *self._aircraft_args, cfg.v_g_min, BANK_LIMIT,
            )
            if status != _kernels.STATUS_OK:
                raise AssertionError("stored edge failed to re-cost")
            times = t0 + np.linspace(0.0, cfg.segment_duration, cfg.steps_per_segment + 1)
            segments.append(SolutionSegment(
                tag=tag, controls=controls.copy(), times=times, knots=knots,
                energy_rate_steps=edot, raw_cost=float(raw),
                offset_cost=float(raw + self.cost_offset * dist),
                ground_distance=float(dist),
            ))
            state = knots[-1].copy()
            t0 += cfg.segment_duration

        return SolutionPath(
            segments=tuple(segments),
            raw_cost=float(self._raw_cost[node_id]),
            offset_cost=float(self._offset_cost[node_id]),
            flight_time=len(segments) * cfg.segment_duration,
        )

    # ----------------------------------------------------------------- runs

    def plan(self) -> PlanResult:
        """Iterate until the budget is exhausted and report the best solution.

        Wall time covers the iteration loop only; when the goal already
        contains the start the result is returned without iterating.
        """
        cfg = self.cfg
        if self._start_in_goal:
            return self._result(0.0)
        t0 = time.perf_counter()
        deadline = None if cfg.seconds is None else t0 + cfg.seconds
        max_iter = cfg.iterations if cfg.iterations is not None else None
        while True:
            if max_iter is not None and self.iterations >= max_iter:
                break
            if deadline is not None and time.perf_counter() >= deadline:
                break
            self.step()
        return self._result(time.perf_counter() - t0)

    def _result(self, wall: float) -> PlanResult:
        solved = self.best_solution is not None
        return PlanResult(
            status=PlanStatus.SOLVED if solved else PlanStatus.NO_SOLUTION,
            solution=self.best_solution,
            raw_cost=self.best_solution.raw_cost if solved else None,
            offset_cost=float(self.best_offset) if solved else None,
            flight_time=self.best_solution.flight_time if solved else None,
            iterations=self.iterations,
            active_nodes=len(self._node_index),
            tree_nodes=self._node_count,
            witnesses=len(self._wit_rep),
            wall_seconds=wall,
            iterations_per_second=self.iterations / wall if wall > 0.0 else 0.0,
            sampler=getattr(self.sampler, "kind", "custom"),
            seed=self.cfg.seed,
            cost_offset=self.cost_offset,
            best_history=tuple(self.best_history),
        )

    # ------------------------------------------------------------ inspection

    def witness_states(self) -> np.ndarray:
        if not self._wit_states:
            return np.empty((0, 4))
        return np.stack(self._wit_states)

    def witness_representatives(self) -> list[int]:
        return list(self._wit_rep)

    def active_node_ids(self) -> np.ndarray:
        return np.flatnonzero(self._active[: self._next_id])

    def tree_node_ids(self) -> np.ndarray:
        return np.flatnonzero(self._in_tree[: self._next_id])

    def node_parent(self, nid: int) -> int:
        return int(self._parent[nid])

    def node_offset_cost(self, nid: int) -> float:
        return float(self._offset_cost[nid])

    def node_state(self, nid: int) -> State:
        return State.from_array(self._states[nid])

    def node_raw_cost(self, nid: int) -> float:
        return float(self._raw_cost[nid])


def sst_plan(
    env: Environment,
    cfg: PlannerConfig,
    sampler=None,
    aircraft: AircraftParams | None = None,
) -> PlanResult:
    """Run one SST query; deterministic given the seed and an iteration budget."""
    return SstPlanner(env, cfg, sampler=sampler, aircraft=aircraft).plan()


def load_planner_config(text: str) -> PlannerConfig:
    """Parse and validate a planner config document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"planner config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("planner config must be a JSON object")
    version = doc.get("version")
    if version != PLANNER_SCHEMA_VERSION:
        raise ConfigError(f"planner.version: expected {PLANNER_SCHEMA_VERSION}, got {version!r}")
    kwargs = {}
    numeric = {
        "delta_bn", "delta_s", "weight_position", "weight_height", "weight_course",
        "goal_bias", "segment_duration", "substeps_per_step", "steps_per_segment",
        "v_g_min", "h_min", "cost_offset", "seed", "iterations", "seconds",
    }
    for key in numeric:
        if key in doc and doc[key] is not None:
            v = doc[key]
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"planner.{key}: expected a finite number, got {v!r}")
            kwargs[key] = v
    for key in ("steps_per_segment", "substeps_per_step", "seed", "iterations"):
        if key in kwargs:
            if kwargs[key] != int(kwargs[key]):
                raise ConfigError(f"planner.{key}: expected an integer, got {kwargs[key]!r}")
            kwargs[key] = int(kwargs[key])
    if "iterations" in doc and doc["iterations"] is None:
        kwargs["iterations"] = None
    if "sampler" in doc:
        kwargs["sampler"] = doc["sampler"]
    try:
        return PlannerConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"planner: {exc}") from exc


def save_planner_config(cfg: PlannerConfig) -> str:
    doc = {"version": PLANNER_SCHEMA_VERSION}
    for key in ("delta_bn", "delta_s", "weight_position", "weight_height",
                "weight_course", "goal_bias", "segment_duration", "steps_per_segment",
                "substeps_per_step", "v_g_min", "h_min", "cost_offset", "sampler",
                "seed", "iterations", "seconds"):
        doc[key] = getattr(cfg, key)
    return json.dumps(doc, indent=2) + "\n"


def override_config(cfg: PlannerConfig, **overrides) -> PlannerConfig:
    """Apply non-None overrides (CLI flags / env vars) onto a config.

    Overriding one budget kind clears the other, so `--seconds 20` really
    means a wall-clock budget even when the config carried iterations.
    """
    changes = {k: v for k, v in overrides.items() if v is not None}
    if "seconds" in changes and "iterations" not in changes:
        changes["iterations"] = None
    elif "iterations" in changes and "seconds" not in changes:
        changes["seconds"] = None
    if not changes:
        return cfg
    return replace(cfg, **changes)
