"""Trajectory/run-stats serialization and the figure builders used by the CLI.

Trajectory CSV (schema soarplan/trajectory/v1): one row per integration knot.
The control columns on a row describe the step leaving that knot; the final
knot of the path leaves them empty. Floats are written with repr so identical
runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import State, propagate
from .environment import Environment
from .planner import PlanResult, SolutionPath
from .primitives import (
    PrimitiveConfig,
    PrimitiveKind,
    enumerate_primitives,
    to_control_sequence,
)
from .svgplot import Figure
from .wind import WindField

__all__ = [
    "TRAJECTORY_SCHEMA",
    "RUN_STATS_SCHEMA",
    "PRIMITIVES_SCHEMA",
    "TrajectoryData",
    "format_trajectory_csv",
    "parse_trajectory_csv",
    "format_run_stats",
    "trajectory_figures",
    "primitive_rows",
    "format_primitives_csv",
    "primitive_figures",
    "KIND_COLORS",
]

TRAJECTORY_SCHEMA = "soarplan/trajectory/v1"
RUN_STATS_SCHEMA = "soarplan/run-stats/v1"
PRIMITIVES_SCHEMA = "soarplan/primitives/v1"

_TRAJ_FIELDS = (
    "time_s", "north_m", "east_m", "height_m", "course_rad",
    "airspeed_mps", "turn_rate_radps", "flight_path_angle_rad",
    "primitive_id", "energy_rate",
)

# figure-legend colors by primitive kind
KIND_COLORS = {
    PrimitiveKind.STRAIGHT: "green",
    PrimitiveKind.CURVE: "blue",
    PrimitiveKind.SPIRAL: "black",
    PrimitiveKind.SPLINE: "red",
}


def _f(x: float) -> str:
    return repr(float(x))


@dataclass(frozen=True, eq=False)
class TrajectoryData:
    """Parsed trajectory CSV: knot states plus per-step control columns."""

    times: np.ndarray     # (M,)
    states: np.ndarray    # (M, 4)
    controls: np.ndarray  # (M, 3), NaN on rows without a step
    tags: np.ndarray      # (M,), -2 marks rows without a step
    energy_rates: np.ndarray  # (M,), NaN on rows without a step


def format_trajectory_csv(solution: SolutionPath, start: State) -> str:
    """Serialize a solution path; a zero-length path still records the start."""
    buf = io.StringIO()
    buf.write(f"# schema: {TRAJECTORY_SCHEMA}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_TRAJ_FIELDS)

    def state_cells(t, s4):
        return [_f(t), _f(s4[0]), _f(s4[1]), _f(s4[3]), _f(s4[2])]

    if not solution.segments:
        writer.writerow(state_cells(0.0, start.as_array()) + ["", "", "", "", ""])
        return buf.getvalue()

    for seg in solution.segments:
        for k in range(seg.controls.shape[0]):
            writer.writerow(
                state_cells(seg.times[k], seg.knots[k])
                + [_f(seg.controls[k, 0]), _f(seg.controls[k, 1]), _f(seg.controls[k, 2]),
                   str(int(seg.tag)), _f(seg.energy_rate_steps[k])]
            )
    last = solution.segments[-1]
    writer.writerow(state_cells(last.times[-1], last.knots[-1]) + ["", "", "", "", ""])
    return buf.getvalue()


def parse_trajectory_csv(text: str) -> TrajectoryData:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# schema: "):
        raise ValueError("trajectory CSV is missing its schema line")
    schema = lines[0].removeprefix("# schema: ").strip()
    if schema != TRAJECTORY_SCHEMA:
        raise ValueError(f"unsupported trajectory schema {schema!r}")
    reader = csv.reader(lines[1:])
    header = next(reader)
    if tuple(header) != _TRAJ_FIELDS:
        raise ValueError("trajectory CSV header does not match the schema")
    times, states, controls, tags, rates = [], [], [], [], []
    for row in reader:
        if not row:
            continue
        times.append(float(row[0]))
        states.append((float(row[1]), float(row[2]), float(row[4]), float(row[3])))
        if row[5] == "":
            controls.append((math.nan,) * 3)
            tags.append(-2)
            rates.append(math.nan)
        else:
            controls.append((float(row[5]), float(row[6]), float(row[7])))
            tags.append(int(row[8]))
            rates.append(float(row[9]))
    return TrajectoryData(
        times=np.array(times),
        states=np.array(states).reshape(-1, 4),
        controls=np.array(controls).reshape(-1, 3),
        tags=np.array(tags, dtype=np.int64),
        energy_rates=np.array(rates),
    )


def format_run_stats(result: PlanResult) -> str:
    doc = {
        "schema": RUN_STATS_SCHEMA,
        "status": result.status.value,
        "sampler": result.sampler,
        "seed": result.seed,
        "iterations": result.iterations,
        "raw_cost": result.raw_cost,
        "offset_cost": result.offset_cost,
        "cost_offset_per_meter": result.cost_offset,
        "flight_time_s": result.flight_time,
        "solution_depth": result.solution.depth if result.solution is not None else None,
        "active_nodes": result.active_nodes,
        "tree_nodes": result.tree_nodes,
        "witnesses": result.witnesses,
        "wall_seconds": result.wall_seconds,
        "iterations_per_second": result.iterations_per_second,
        "best_history": [
            {"iteration": it, "offset_cost": c} for it, c in result.best_history
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def _environment_overlay(fig: Figure, env: Environment, top_down: bool) -> None:
    if not top_down:
        return
    for t in env.wind.thermals:
        fig.add_circle(t.center_east, t.center_north, t.radius,
                       stroke="goldenrod", fill="yellow", opacity=0.5)
    fig.add_circle(env.goal.east, env.goal.north, env.goal.radius,
                   stroke="red", fill="none")
    fig.add_circle(env.start.east, env.start.north, 8.0,
                   stroke="limegreen", fill="limegreen")


def trajectory_figures(
    data: TrajectoryData,
    env: Environment | None = None,
    title: str = "trajectory",
) -> tuple[str, str]:
    """Top-down (east/north) and side (ground distance/height) SVG views."""
    north = data.states[:, 0]
    east = data.states[:, 1]
    height = data.states[:, 3]

    top = Figure(title=f"{title} (top-down)", xlabel="east [m]", ylabel="north [m]",
                 equal_aspect=True)
    if env is not None:
        _environment_overlay(top, env, top_down=True)
    top.add_line(east, north, color="royalblue", width=1.5, label="path")

    dist = np.concatenate([
        [0.0],
        np.cumsum(np.hypot(np.diff(north), np.diff(east))),
    ])
    side = Figure(title=f"{title} (side view)", xlabel="horizontal distance [m]",
                  ylabel="height [m]")
    side.add_line(dist, height, color="royalblue", width=1.5, label="height")
    return top.to_svg(), side.to_svg()


def primitive_rows(cfg: PrimitiveConfig, substeps_per_step: int = 10):
    """Library table: parameters plus the zero-wind endpoint flown from the origin."""
    origin = State(0.0, 0.0, 0.0, 0.0)
    calm = WindField()
    rows = []
    for p in enumerate_primitives(cfg):
        seg = propagate(origin, to_control_sequence(p, cfg), calm, substeps_per_step)
        end = seg.end_state
        rows.append((p, seg, end))
    return rows


def format_primitives_csv(cfg: PrimitiveConfig) -> str:
    buf = io.StringIO()
    buf.write(f"# schema: {PRIMITIVES_SCHEMA}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow((
        "id", "kind", "airspeed_mps", "turn_first_half_deg", "turn_second_half_deg",
        "flight_path_angle_deg", "end_north_m", "end_east_m", "end_height_m",
        "end_course_deg",
    ))
    for p, _, end in primitive_rows(cfg):
        writer.writerow((
            p.id, p.kind.value, _f(p.airspeed),
            _f(math.degrees(p.turn_first_half)), _f(math.degrees(p.turn_second_half)),
            _f(math.degrees(p.flight_path_angle)),
            _f(end.north), _f(end.east), _f(end.height), _f(math.degrees(end.course)),
        ))
    return buf.getvalue()


def primitive_figures(cfg: PrimitiveConfig) -> tuple[str, str]:
    """Fan-out of the whole library from the origin, colored by kind."""
    top = Figure(title="motion primitives (top-down)", xlabel="east [m]",
                 ylabel="north [m]", equal_aspect=True)
    side = Figure(title="motion primitives (side view)", xlabel="north [m]",
                  ylabel="height [m]")
    seen: set[str] = set()
    for p, seg, _ in primitive_rows(cfg):
        color = KIND_COLORS[p.kind]
        label = None if p.kind.value in seen else p.kind.value
        seen.add(p.kind.value)
        top.add_line(seg.knots[:, 1], seg.knots[:, 0], color=color, label=label)
        side.add_line(seg.knots[:, 0], seg.knots[:, 3], color=color, label=label)
    return top.to_svg(), side.to_svg()
