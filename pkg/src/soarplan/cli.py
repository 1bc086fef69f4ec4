"""Command-line interface.

Subcommands:
    plan        run one planning query, write trajectory CSV + stats + SVGs
    bench       run the sampler-comparison experiment, write reports
    primitives  export the motion-primitive library (CSV + fan-out SVGs)
    plot        re-render SVG views from an existing trajectory CSV
    validate    load and cross-check all configs, listing every problem

Exit codes: 0 success/solved, 2 planning finished without a solution,
1 configuration or I/O error.

Flag values override SOARPLAN_* environment variables, which override the
config files: e.g. `--seed` beats SOARPLAN_SEED beats planner.json's seed.
"""

from __future__ import annotations

import argparse
import os
import sys
from importlib import resources
from pathlib import Path

from .bench import ExperimentSpec, export_report, format_report, run_experiment
from .energy import AircraftParams, load_aircraft
from .environment import ConfigError, Environment, load_environment
from .export import (
    format_primitives_csv,
    format_run_stats,
    format_trajectory_csv,
    parse_trajectory_csv,
    primitive_figures,
    trajectory_figures,
)
from .planner import (
    PlannerConfig,
    load_planner_config,
    override_config,
    sst_plan,
)

__all__ = ["main"]

ENV_PREFIX = "SOARPLAN_"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_SOLUTION = 2


def _env_override(name: str, cast):
    raw = os.environ.get(ENV_PREFIX + name.upper())
    if raw is None or raw == "":
        return None
    try:
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"environment variable {ENV_PREFIX}{name.upper()}: {exc}") from exc


def _resolve(args, name: str, cast):
    """Flag value if given, else SOARPLAN_<NAME> env var, else None."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    return _env_override(name, cast)


def _default_config(name: str) -> str:
    return resources.files("soarplan.data").joinpath(name).read_text(encoding="utf-8")


def _read_config(path: str | None, default_name: str) -> str:
    if path is None:
        return _default_config(default_name)
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    return p.read_text(encoding="utf-8")


def _load_env(args) -> Environment:
    return load_environment(_read_config(_resolve(args, "env", str), "environment.json"))


def _load_aircraft(args) -> AircraftParams:
    return load_aircraft(_read_config(_resolve(args, "aircraft", str), "aircraft.json"))


def _load_planner(args) -> PlannerConfig:
    cfg = load_planner_config(_read_config(_resolve(args, "planner", str), "planner.json"))
    return override_config(
        cfg,
        sampler=_resolve(args, "sampler", str),
        seed=_resolve(args, "seed", int),
        iterations=_resolve(args, "iters", int),
        seconds=_resolve(args, "seconds", float),
    )


def _out_dir(args) -> Path:
    out = Path(_resolve(args, "out", str) or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="")
    print(f"wrote {path}")


def cmd_plan(args) -> int:
    env = _load_env(args)
    aircraft = _load_aircraft(args)
    cfg = _load_planner(args)
    out = _out_dir(args)

    result = sst_plan(env, cfg, aircraft=aircraft)
    _write(out / "run_stats.json", format_run_stats(result))
    if not result.solved:
        print(f"no solution after {result.iterations} iterations "
              f"({result.wall_seconds:.2f} s)")
        return EXIT_NO_SOLUTION

    trajectory = format_trajectory_csv(result.solution, env.start)
    _write(out / "trajectory.csv", trajectory)
    top, side = trajectory_figures(parse_trajectory_csv(trajectory), env,
                                   title=f"{result.sampler} solution")
    _write(out / "trajectory_topdown.svg", top)
    _write(out / "trajectory_side.svg", side)
    print(
        f"solved: depth {result.solution.depth}, raw cost {result.raw_cost:.4f}, "
        f"flight time {result.flight_time:.1f} s, "
        f"{result.iterations} iterations in {result.wall_seconds:.2f} s"
    )
    return EXIT_OK


def cmd_bench(args) -> int:
    env = _load_env(args)
    aircraft = _load_aircraft(args)
    cfg = _load_planner(args)
    out = _out_dir(args)
    runs = _resolve(args, "runs", int) or 30
    base_seed = _resolve(args, "seed", int)
    spec = ExperimentSpec(
        env=env,
        aircraft=aircraft,
        planner=cfg,
        samplers=tuple(args.samplers.split(",")),
        runs=runs,
        base_seed=base_seed if base_seed is not None else cfg.seed,
        workers=args.workers,
    )
    records, stats = run_experiment(spec)
    for path in export_report(records, stats, out):
        print(f"wrote {path}")
    print(format_report(records, stats), end="")
    return EXIT_OK


def cmd_primitives(args) -> int:
    cfg = _load_planner(args).primitive_config
    out = _out_dir(args)
    _write(out / "primitives.csv", format_primitives_csv(cfg))
    top, side = primitive_figures(cfg)
    _write(out / "primitives_topdown.svg", top)
    _write(out / "primitives_side.svg", side)
    return EXIT_OK


def cmd_plot(args) -> int:
    path = Path(args.trajectory)
    if not path.exists():
        raise ConfigError(f"trajectory file not found: {path}")
    data = parse_trajectory_csv(path.read_text(encoding="utf-8"))
    env = None
    if _resolve(args, "env", str) is not None:
        env = _load_env(args)
    out = _out_dir(args)
    top, side = trajectory_figures(data, env, title=path.stem)
    _write(out / f"{path.stem}_topdown.svg", top)
    _write(out / f"{path.stem}_side.svg", side)
    return EXIT_OK


def cmd_validate(args) -> int:
    problems: list[str] = []
    env = aircraft = cfg = None
    try:
        env = _load_env(args)
    except ConfigError as exc:
        problems.append(str(exc))
    try:
        aircraft = _load_aircraft(args)
    except ConfigError as exc:
        problems.append(str(exc))
    try:
        cfg = _load_planner(args)
    except ConfigError as exc:
        problems.append(str(exc))

    if env is not None:
        b = env.bounds
        if not b.contains(env.goal.north, env.goal.east, env.goal.height):
            problems.append("environment.goal: center lies outside the world bounds")
        if not b.contains_state(env.start):
            problems.append("environment.start: lies outside the world bounds")
        for i, t in enumerate(env.wind.thermals):
            if t.top_height < b.height_min or t.base_height > b.height_max:
                problems.append(
                    f"environment.thermals[{i}]: band does not intersect the world heights"
                )
    if env is not None and cfg is not None:
        if env.start.height < cfg.h_min:
            problems.append("environment.start: height below the planner's floor h_min")
        if cfg.h_min > env.bounds.height_max:
            problems.append("planner.h_min: above the world's height range")

    if problems:
        for p in problems:
            print(f"invalid: {p}")
        return EXIT_ERROR
    print("all configs valid")
    return EXIT_OK


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--env", help="environment config JSON (default: built-in benchmark)")
    p.add_argument("--aircraft", help="aircraft config JSON (default: built-in)")
    p.add_argument("--planner", help="planner config JSON (default: built-in)")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sampler", choices=("primitive", "continuous"),
                   help="control sampling space")
    p.add_argument("--seed", type=int, help="random seed override")
    p.add_argument("--iters", type=int, help="iteration budget override")
    p.add_argument("--seconds", type=float, help="wall-clock budget override (seconds)")
    p.add_argument("--out", help="output directory (default: ./out)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="soarplan",
        description="Energy-aware SST planning for a fixed-wing UAS in thermal updrafts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="run one planning query")
    _add_config_flags(p)
    _add_run_flags(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("bench", help="run the sampler comparison experiment")
    _add_config_flags(p)
    _add_run_flags(p)
    p.add_argument("--runs", type=int, help="runs per sampler (default: 30)")
    p.add_argument("--samplers", default="primitive,continuous",
                   help="comma-separated sampler list (default: primitive,continuous)")
    p.add_argument("--workers", type=int, default=0,
                   help="parallel worker processes; <=1 runs serially for timing fidelity")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("primitives", help="export the motion-primitive library")
    _add_config_flags(p)
    p.add_argument("--out", help="output directory (default: ./out)")
    p.set_defaults(func=cmd_primitives)

    p = sub.add_parser("plot", help="render SVG views from a trajectory CSV")
    p.add_argument("--trajectory", required=True, help="trajectory CSV to plot")
    p.add_argument("--env", help="environment config for overlays (optional)")
    p.add_argument("--out", help="output directory (default: ./out)")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("validate", help="cross-check all configuration files")
    _add_config_flags(p)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
