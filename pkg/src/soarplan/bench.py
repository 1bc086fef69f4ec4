"""Monte Carlo comparison harness: repeated seeded runs per sampler, statistics,
CSV/SVG reports.

Run k of every sampler uses seed base_seed + k, so samplers face matched
queries and removing other runs from a spec never changes run k's record.
Under an iteration budget the records are fully deterministic; wall-clock
timings are then left out of the records CSV so repeated invocations stay
byte-identical (they remain available under wall-clock budgets, where runs
are inherently timing-dependent).

Cost, flight time and iteration statistics are computed over solved runs
only; means are reported with sample standard deviations (n - 1).
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .energy import AircraftParams
from .environment import Environment
from .planner import PlannerConfig, sst_plan
from .svgplot import box_chart

__all__ = [
    "RECORDS_SCHEMA",
    "SUMMARY_SCHEMA",
    "ExperimentSpec",
    "RunRecord",
    "MetricSummary",
    "SamplerSummary",
    "SummaryStats",
    "run_experiment",
    "summarize",
    "export_report",
    "format_records_csv",
    "parse_records_csv",
    "format_summary_csv",
    "format_report",
]

RECORDS_SCHEMA = "soarplan/records/v1"
SUMMARY_SCHEMA = "soarplan/summary/v1"

_RECORD_FIELDS = (
    "sampler", "run_index", "seed", "status", "raw_cost", "offset_cost",
    "flight_time_s", "iterations", "active_nodes", "tree_nodes", "witnesses",
    "wall_seconds",
)


@dataclass(frozen=True)
class ExperimentSpec:
    """One comparison experiment: samplers x runs over a shared environment."""

    env: Environment
    aircraft: AircraftParams
    planner: PlannerConfig
    samplers: tuple[str, ...] = ("primitive", "continuous")
    runs: int = 30
    base_seed: int = 0
    workers: int = 0     # <=1 runs serially (also the timing-fidelity mode)

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if not self.samplers:
            raise ValueError("at least one sampler is required")
        for s in self.samplers:
            if s not in ("primitive", "continuous"):
                raise ValueError(f"unknown sampler {s!r}")


@dataclass(frozen=True)
class RunRecord:
    sampler: str
    run_index: int
    seed: int
    solved: bool
    raw_cost: float | None
    offset_cost: float | None
    flight_time: float | None
    iterations: int
    active_nodes: int
    tree_nodes: int
    witnesses: int
    wall_seconds: float | None


@dataclass(frozen=True)
class MetricSummary:
    mean: float | None
    std: float | None
    count: int


@dataclass(frozen=True)
class SamplerSummary:
    sampler: str
    runs: int
    solved: int
    success_rate: float
    raw_cost: MetricSummary
    offset_cost: MetricSummary
    flight_time: MetricSummary
    iterations: MetricSummary
    iterations_per_second: MetricSummary


@dataclass(frozen=True)
class SummaryStats:
    """Per-sampler summaries plus primitive/continuous comparison ratios."""

    samplers: tuple[SamplerSummary, ...]
    iteration_rate_ratio: float | None   # primitive over continuous
    raw_cost_ratio: float | None
    flight_time_ratio: float | None

    def for_sampler(self, name: str) -> SamplerSummary:
        for s in self.samplers:
            if s.sampler == name:
                return s
        raise KeyError(name)


def _run_one(args) -> RunRecord:
    env, aircraft, planner_cfg, sampler, run_index, seed = args
    cfg = replace(planner_cfg, sampler=sampler, seed=seed)
    result = sst_plan(env, cfg, aircraft=aircraft)
    deterministic = cfg.seconds is None
    return RunRecord(
        sampler=sampler,
        run_index=run_index,
        seed=seed,
        solved=result.solved,
        raw_cost=result.raw_cost,
        offset_cost=result.offset_cost,
        flight_time=result.flight_time,
        iterations=result.iterations,
        active_nodes=result.active_nodes,
        tree_nodes=result.tree_nodes,
        witnesses=result.witnesses,
        wall_seconds=None if deterministic else result.wall_seconds,
    )


def run_experiment(spec: ExperimentSpec) -> tuple[list[RunRecord], SummaryStats]:
    """Execute all runs (optionally in a process pool) and summarize them."""
    jobs = [
        (spec.env, spec.aircraft, spec.planner, sampler, k, spec.base_seed + k)
        for sampler in spec.samplers
        for k in range(spec.runs)
    ]
    workers = spec.workers if spec.workers > 0 else (os.cpu_count() or 1)
    if workers <= 1 or len(jobs) == 1:
        records = [_run_one(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            records = list(pool.map(_run_one, jobs))
    return records, summarize(records)


def _metric(values: list[float]) -> MetricSummary:
    if not values:
        return MetricSummary(None, None, 0)
    arr = np.asarray(values, dtype=float)
    mean = float(np.mean(arr))
    std = float(np.std(arr, ddof=1)) if arr.size > 1 else None
    return MetricSummary(mean, std, int(arr.size))


def _ratio(a: MetricSummary, b: MetricSummary) -> float | None:
    if a.mean is None or b.mean is None or b.mean == 0.0:
        return None
    return a.mean / b.mean


def summarize(records: list[RunRecord]) -> SummaryStats:
    """Per-sampler mean/std over solved runs, in first-seen sampler order."""
    if not records:
        raise ValueError("no records to summarize")
    order: list[str] = []
    for r in records:
        if r.sampler not in order:
            order.append(r.sampler)
    summaries = []
    for name in order:
        rs = [r for r in records if r.sampler == name]
        solved = [r for r in rs if r.solved]
        rates = [
            r.iterations / r.wall_seconds
            for r in solved
            if r.wall_seconds is not None and r.wall_seconds > 0.0
        ]
        summaries.append(SamplerSummary(
            sampler=name,
            runs=len(rs),
            solved=len(solved),
            success_rate=len(solved) / len(rs),
            raw_cost=_metric([r.raw_cost for r in solved]),
            offset_cost=_metric([r.offset_cost for r in solved]),
            flight_time=_metric([r.flight_time for r in solved]),
            iterations=_metric([float(r.iterations) for r in solved]),
            iterations_per_second=_metric(rates),
        ))
    stats = SummaryStats(tuple(summaries), None, None, None)
    try:
        prim = stats.for_sampler("primitive")
        cont = stats.for_sampler("continuous")
    except KeyError:
        return stats
    rate_ratio = _ratio(prim.iterations_per_second, cont.iterations_per_second)
    if rate_ratio is None:
        # iteration budgets have no wall clock; fall back to raw iteration counts
        rate_ratio = _ratio(prim.iterations, cont.iterations)
    return SummaryStats(
        samplers=tuple(summaries),
        iteration_rate_ratio=rate_ratio,
        raw_cost_ratio=_ratio(prim.raw_cost, cont.raw_cost),
        flight_time_ratio=_ratio(prim.flight_time, cont.flight_time),
    )


# ------------------------------------------------------------------ reports

def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "solved" if v else "no_solution"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_records_csv(records: list[RunRecord]) -> str:
    buf = io.StringIO()
    buf.write(f"# schema: {RECORDS_SCHEMA}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_RECORD_FIELDS)
    for r in records:
        writer.writerow((
            r.sampler, r.run_index, r.seed, _cell(r.solved),
            _cell(r.raw_cost), _cell(r.offset_cost), _cell(r.flight_time),
            r.iterations, r.active_nodes, r.tree_nodes, r.witnesses,
            _cell(r.wall_seconds),
        ))
    return buf.getvalue()


def parse_records_csv(text: str) -> list[RunRecord]:
    lines = text.splitlines()
    if not lines or lines[0] != f"# schema: {RECORDS_SCHEMA}":
        raise ValueError("records CSV is missing its schema line")
    reader = csv.reader(lines[1:])
    header = next(reader)
    if tuple(header) != _RECORD_FIELDS:
        raise ValueError("records CSV header does not match the schema")

    def opt_float(s: str) -> float | None:
        return None if s == "" else float(s)

    out = []
    for row in reader:
        if not row:
            continue
        out.append(RunRecord(
            sampler=row[0],
            run_index=int(row[1]),
            seed=int(row[2]),
            solved=row[3] == "solved",
            raw_cost=opt_float(row[4]),
            offset_cost=opt_float(row[5]),
            flight_time=opt_float(row[6]),
            iterations=int(row[7]),
            active_nodes=int(row[8]),
            tree_nodes=int(row[9]),
            witnesses=int(row[10]),
            wall_seconds=opt_float(row[11]),
        ))
    return out


def format_summary_csv(stats: SummaryStats) -> str:
    buf = io.StringIO()
    buf.write(f"# schema: {SUMMARY_SCHEMA}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow((
        "sampler", "runs", "solved", "success_rate",
        "raw_cost_mean", "raw_cost_std", "offset_cost_mean", "offset_cost_std",
        "flight_time_mean", "flight_time_std", "iterations_mean", "iterations_std",
        "iterations_per_second_mean", "iterations_per_second_std",
    ))
    for s in stats.samplers:
        writer.writerow((
            s.sampler, s.runs, s.solved, _cell(float(s.success_rate)),
            _cell(s.raw_cost.mean), _cell(s.raw_cost.std),
            _cell(s.offset_cost.mean), _cell(s.offset_cost.std),
            _cell(s.flight_time.mean), _cell(s.flight_time.std),
            _cell(s.iterations.mean), _cell(s.iterations.std),
            _cell(s.iterations_per_second.mean), _cell(s.iterations_per_second.std),
        ))
    for name, value in (
        ("iteration_rate_ratio", stats.iteration_rate_ratio),
        ("raw_cost_ratio", stats.raw_cost_ratio),
        ("flight_time_ratio", stats.flight_time_ratio),
    ):
        buf.write(f"# {name} (primitive/continuous): {_cell(value) or 'n/a'}\n")
    return buf.getvalue()


def _fmt_ms(m: MetricSummary, digits: int = 4) -> str:
    if m.mean is None:
        return "n/a"
    if m.std is None:
        return f"{m.mean:.{digits}g}"
    return f"{m.mean:.{digits}g} +- {m.std:.{digits}g}"


def format_report(records: list[RunRecord], stats: SummaryStats) -> str:
    """Human-readable comparison block printed by the bench CLI."""
    out = ["benchmark summary"]
    for s in stats.samplers:
        out.append(
            f"  {s.sampler:<11} solved {s.solved}/{s.runs} "
            f"({100.0 * s.success_rate:.1f}%)"
        )
        out.append(f"      raw cost         {_fmt_ms(s.raw_cost)}")
        out.append(f"      offset cost      {_fmt_ms(s.offset_cost)}")
        out.append(f"      flight time [s]  {_fmt_ms(s.flight_time)}")
        out.append(f"      iterations       {_fmt_ms(s.iterations)}")
        out.append(f"      iterations/s     {_fmt_ms(s.iterations_per_second)}")
    def ratio(v):
        return "n/a" if v is None else f"{v:.4f}"
    out.append("  ratios (primitive / continuous):")
    out.append(f"      iteration rate   {ratio(stats.iteration_rate_ratio)}")
    out.append(f"      raw cost         {ratio(stats.raw_cost_ratio)}")
    out.append(f"      flight time      {ratio(stats.flight_time_ratio)}")
    return "\n".join(out) + "\n"


def export_report(records: list[RunRecord], stats: SummaryStats, out_dir) -> list[str]:
    """Write records/summary CSVs and the cost/flight-time/iterations charts."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []

    def write(name: str, text: str):
        p = out / name
        p.write_text(text, encoding="utf-8", newline="")
        paths.append(str(p))

    write("records.csv", format_records_csv(records))
    write("summary.csv", format_summary_csv(stats))

    def solved_values(extract):
        return {
            s.sampler: [
                extract(r) for r in records
                if r.sampler == s.sampler and r.solved and extract(r) is not None
            ]
            for s in stats.samplers
        }

    write("cost_box.svg", box_chart(
        solved_values(lambda r: r.raw_cost), "solution raw cost", "cost"))
    write("flight_time_box.svg", box_chart(
        solved_values(lambda r: r.flight_time), "solution flight time", "seconds"))
    write("iterations_box.svg", box_chart(
        solved_values(lambda r: float(r.iterations)), "iterations per run", "iterations"))
    return paths
