"""Acceptance suite: one test per release criterion, each printing a verdict line.

Run with `pytest tests/test_acceptance.py -v -s` to see the PASS/FAIL lines.
The comparative wall-clock criterion (6) defaults to a short per-run budget so
the suite stays CI-sized; set SOARPLAN_TEST_BENCH_SECONDS=20 to reproduce the
full-scale protocol.
"""

import math
import os
import time
from collections import Counter

import numpy as np
import pytest
from scipy.spatial import cKDTree

from soarplan import (
    AircraftParams,
    ControlInput,
    ControlSequence,
    MetricWeights,
    PlannerConfig,
    PrimitiveConfig,
    PrimitiveKind,
    State,
    WindField,
    enumerate_primitives,
    fuel_rate,
    lift_drag,
    propagate,
    segment_cost,
    sst_plan,
    thrust,
)
from soarplan.bench import ExperimentSpec, format_report, run_experiment, summarize
from soarplan.cli import main as cli_main
from soarplan.planner import SstPlanner
from soarplan.spatial import metric_distance

CALM = WindField()


def report(criterion: int, ok: bool, detail: str) -> None:
    print(f"[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {detail}")


# --------------------------------------------------------------- criterion 1

def test_criterion_1_primitive_library_cardinality():
    t0 = time.perf_counter()
    prims = enumerate_primitives(PrimitiveConfig())
    counts = Counter(p.kind for p in prims)
    elapsed = time.perf_counter() - t0
    ok = (
        len(prims) == 174
        and counts[PrimitiveKind.STRAIGHT] == 10
        and counts[PrimitiveKind.CURVE] == 60
        and counts[PrimitiveKind.SPIRAL] == 80
        and counts[PrimitiveKind.SPLINE] == 24
        and elapsed < 1.0
    )
    report(1, ok, f"174 primitives split (10, 60, 80, 24) in {elapsed:.3f} s")
    assert ok


# --------------------------------------------------------------- criterion 2

def _relative_endpoint_error(seq, expected, substeps, start=None):
    start = start if start is not None else State(0, 0, 0, 100)
    seg = propagate(start, seq, CALM, substeps)
    end = seg.end_state
    err = math.sqrt(
        (end.north - expected[0]) ** 2
        + (end.east - expected[1]) ** 2
        + (end.height - expected[2]) ** 2
    )
    scale = max(math.sqrt(expected[0] ** 2 + expected[1] ** 2 + expected[2] ** 2), 1.0)
    return err / scale


def test_criterion_2_propagation_oracles():
    t0 = time.perf_counter()
    failures = []

    # straight line: p = v t along the course, h = h0 + v sin(gamma) t
    gamma = math.radians(15.0)
    seq = ControlSequence.constant(ControlInput(20.0, 0.0, gamma), 10.0, 10)
    straight_expected = (
        20.0 * math.cos(gamma) * 10.0, 0.0, 100 + 20.0 * math.sin(gamma) * 10.0
    )

    # circular arc: radius v / omega
    turn = math.radians(90.0)
    omega = turn / 10.0
    radius = 10.0 / omega
    arc_seq = ControlSequence.constant(ControlInput(10.0, omega, 0.0), 10.0, 10)
    arc_expected = (radius * math.sin(turn), radius * (1 - math.cos(turn)), 100.0)

    # helix: horizontal circle of radius v cos(gamma)/omega plus linear climb
    h_gamma = math.radians(30.0)
    h_omega = math.radians(360.0) / 10.0 * 1.5
    h_radius = 15.0 * math.cos(h_gamma) / h_omega
    chi_end = h_omega * 10.0
    helix_seq = ControlSequence.constant(ControlInput(15.0, h_omega, h_gamma), 10.0, 10)
    helix_expected = (
        h_radius * math.sin(chi_end),
        h_radius * (1 - math.cos(chi_end)),
        100 + 15.0 * math.sin(h_gamma) * 10.0,
    )

    for name, seq_i, expected in (
        ("straight", seq, straight_expected),
        ("arc", arc_seq, arc_expected),
        ("helix", helix_seq, helix_expected),
    ):
        for substeps in (20, 40):
            rel = _relative_endpoint_error(seq_i, expected, substeps)
            if rel > 1e-6:
                failures.append(f"{name}@{substeps}: rel err {rel:.2e}")

    # fourth-order convergence on a quarter-circle curve
    coarse = _relative_endpoint_error(arc_seq, arc_expected, 1)
    fine = _relative_endpoint_error(arc_seq, arc_expected, 2)
    ratio = coarse / fine
    if not (coarse > 1e-12 and ratio >= 8.0):
        failures.append(f"halving ratio {ratio:.1f}")

    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 5.0
    report(2, ok, f"closed-form endpoints within 1e-6, halving ratio {ratio:.1f}, "
                  f"{elapsed:.2f} s" + (f" | {failures}" if failures else ""))
    assert ok


# --------------------------------------------------------------- criterion 3

def test_criterion_3_energy_identities():
    t0 = time.perf_counter()
    p = AircraftParams()
    failures = []

    # thrust closure at gamma = phi = 0 must be exact
    for v in (10.0, 15.0, 20.0):
        for h in (0.0, 250.0, 600.0):
            f = thrust(v, 0.0, 0.0, h, p)
            lift, drag, _ = lift_drag(v, h, p)
            if f.thrust_x != drag or f.thrust_z != lift - p.mass * p.gravity:
                failures.append(f"closure at v={v}, h={h}")

    # fuel rate never positive over the whole reachable envelope
    rng = np.random.default_rng(0)
    for _ in range(2000):
        v = rng.uniform(10.0, 20.0)
        gamma = rng.uniform(-math.pi / 4, math.pi / 4)
        turn = rng.uniform(-math.radians(108.0), math.radians(108.0))
        h = rng.uniform(0.0, 600.0)
        phi = math.atan(v * turn / p.gravity)
        f = thrust(v, gamma, phi, h, p)
        if fuel_rate(f.thrust, v, p) > 0.0:
            failures.append(f"positive fuel rate at v={v:.2f}")
            break

    # closed-loop spiral: the potential terms cancel over a full circle
    seq = ControlSequence.constant(
        ControlInput(15.0, math.radians(360.0) / 10.0, 0.0), 10.0, 10
    )
    seg = propagate(State(0, 0, 0, 300), seq, CALM, 20)
    e = segment_cost(seg, CALM, p)
    height_sum = float(np.sum(e.height_rate_steps)) * seq.step_duration
    if abs(height_sum) > 1e-6:
        failures.append(f"closed-loop height term {height_sum:.2e}")
    fuel_total = -float(np.sum(e.fuel_rate_steps)) * seq.step_duration
    if abs(e.raw_cost - fuel_total) > 1e-6:
        failures.append("closed-loop raw cost is not pure fuel")

    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 5.0
    report(3, ok, f"thrust closure exact, fuel rate <= 0, closed-loop potential "
                  f"{height_sum:.1e}, {elapsed:.2f} s" + (f" | {failures}" if failures else ""))
    assert ok


# --------------------------------------------------------------- criterion 4

def _check_tree_invariants(planner: SstPlanner, weights: MetricWeights, delta_s: float):
    reps = planner.witness_representatives()
    active = set(planner.active_node_ids().tolist())
    tree = set(planner.tree_node_ids().tolist())

    assert len(reps) == len(set(reps)), "a node represents two witnesses"
    assert set(reps) == active, "active set differs from the representatives"

    # acyclicity: ids are allocated parent-first, so parent < child; checking it
    # together with parent-liveness after pruning certifies every chain reaches
    # the root through live nodes
    for nid in tree:
        if nid == 0:
            continue
        parent = planner.node_parent(nid)
        assert parent in tree, f"node {nid} has a pruned parent"
        assert parent < nid, f"node {nid} precedes its parent"

    # witness sparsity: candidate pairs by position (a metric lower bound),
    # then the exact metric on those pairs
    w = planner.witness_states()
    scaled = np.column_stack([
        math.sqrt(weights.position) * w[:, 0],
        math.sqrt(weights.position) * w[:, 1],
        math.sqrt(weights.height) * w[:, 3],
    ])
    pairs = cKDTree(scaled).query_pairs(delta_s, output_type="ndarray")
    for i, j in pairs:
        d = metric_distance(w[i], w[j], weights)
        assert d >= delta_s - 1e-9, f"witnesses {i}, {j} are {d:.3f} apart"
    return len(pairs)


def test_criterion_4_sst_structural_invariants(default_env):
    t0 = time.perf_counter()
    cfg = PlannerConfig(iterations=100_000, seed=17)
    planner = SstPlanner(default_env, cfg)
    weights = cfg.weights

    checked = 0
    for chunk in range(10):
        for _ in range(10_000):
            planner.step()
        checked += _check_tree_invariants(planner, weights, cfg.delta_s)

    costs = [c for _, c in planner.best_history]
    assert all(a > b for a, b in zip(costs, costs[1:])), "best cost not monotone"

    elapsed = time.perf_counter() - t0
    ok = elapsed < 60.0
    report(4, ok, f"100k-iteration fuzz: sparsity, representatives, acyclicity, "
                  f"monotone best ({len(costs)} improvements, "
                  f"{planner.iterations} iters, {checked} near pairs checked) "
                  f"in {elapsed:.1f} s")
    assert ok


# --------------------------------------------------------------- criterion 5

@pytest.mark.slow
def test_criterion_5_planning_success_rates(default_env, default_aircraft):
    t0 = time.perf_counter()
    spec = ExperimentSpec(
        env=default_env,
        aircraft=default_aircraft,
        planner=PlannerConfig(iterations=200_000),
        samplers=("primitive", "continuous"),
        runs=30,
        base_seed=0,
        workers=0,
    )
    records, stats = run_experiment(spec)
    elapsed = time.perf_counter() - t0
    lines = []
    ok = True
    for sampler in spec.samplers:
        s = stats.for_sampler(sampler)
        lines.append(f"{sampler} {s.solved}/{s.runs}")
        if s.solved < 27:
            ok = False
    report(5, ok, f"200k-iteration runs solved: {', '.join(lines)} "
                  f"(>= 27/30 required) in {elapsed:.0f} s")
    assert ok


# --------------------------------------------------------------- criterion 6

@pytest.mark.slow
def test_criterion_6_comparative_direction_report(default_env, default_aircraft):
    seconds = float(os.environ.get("SOARPLAN_TEST_BENCH_SECONDS", "1.5"))
    spec = ExperimentSpec(
        env=default_env,
        aircraft=default_aircraft,
        planner=PlannerConfig(iterations=None, seconds=seconds),
        samplers=("primitive", "continuous"),
        runs=30,
        base_seed=100,
        workers=0,
    )
    records, stats = run_experiment(spec)
    print()
    print(format_report(records, stats))

    prim = stats.for_sampler("primitive")
    cont = stats.for_sampler("continuous")
    flags = []
    for label, value, direction in (
        ("(a) iteration rate primitive/continuous > 1", stats.iteration_rate_ratio,
         lambda v: v > 1.0),
        ("(b) continuous mean raw cost <= primitive", stats.raw_cost_ratio,
         lambda v: v >= 1.0),
        ("(c) primitive mean flight time <= continuous", stats.flight_time_ratio,
         lambda v: v <= 1.0),
    ):
        verdict = "n/a" if value is None else ("PASS" if direction(value) else "FLAG")
        flags.append(verdict)
        print(f"  direction check {label}: ratio="
              f"{'n/a' if value is None else f'{value:.4f}'} [{verdict}]")

    # CI asserts the report, not the directions: all ratios computed, every
    # sampler produced solved runs, and the summary agrees with its records
    ok = (
        prim.solved > 0 and cont.solved > 0
        and stats.iteration_rate_ratio is not None
        and stats.raw_cost_ratio is not None
        and stats.flight_time_ratio is not None
        and all(r.wall_seconds is not None for r in records)
    )
    recomputed = summarize(records)
    ok = ok and recomputed == stats
    report(6, ok, f"comparative report over 30 matched {seconds:.1f} s runs "
                  f"(direction verdicts: {', '.join(flags)})")
    assert ok


# --------------------------------------------------------------- criterion 7

def test_criterion_7_statistics_oracle(default_env, default_aircraft):
    spec = ExperimentSpec(
        env=default_env,
        aircraft=default_aircraft,
        planner=PlannerConfig(iterations=2500),
        samplers=("primitive", "continuous"),
        runs=4,
        base_seed=7,
    )
    records, stats = run_experiment(spec)

    worst = 0.0
    for sampler in spec.samplers:
        s = stats.for_sampler(sampler)
        solved = [r for r in records if r.sampler == sampler and r.solved]
        for metric, values in (
            (s.raw_cost, [r.raw_cost for r in solved]),
            (s.offset_cost, [r.offset_cost for r in solved]),
            (s.flight_time, [r.flight_time for r in solved]),
            (s.iterations, [float(r.iterations) for r in solved]),
        ):
            if not values:
                assert metric.mean is None
                continue
            # brute-force mean and n-1 standard deviation
            mean = sum(values) / len(values)
            worst = max(worst, abs(metric.mean - mean))
            if len(values) > 1:
                var = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
                worst = max(worst, abs(metric.std - math.sqrt(var)))
            else:
                assert metric.std is None
    ok = worst <= 1e-12
    report(7, ok, f"summarize vs brute-force recomputation, worst |delta| = {worst:.2e}")
    assert ok


# --------------------------------------------------------------- criterion 8

def test_criterion_8_byte_identical_outputs(tmp_path):
    plan_args = ["plan", "--sampler", "primitive", "--seed", "5", "--iters", "15000"]
    outs = []
    for name in ("a", "b"):
        out = tmp_path / f"plan_{name}"
        assert cli_main(plan_args + ["--out", str(out)]) == 0
        outs.append((out / "trajectory.csv").read_bytes())
    trajectories_match = outs[0] == outs[1]

    bench_args = ["bench", "--runs", "2", "--seed", "3", "--iters", "2500"]
    recs = []
    for name in ("a", "b"):
        out = tmp_path / f"bench_{name}"
        assert cli_main(bench_args + ["--out", str(out)]) == 0
        recs.append((out / "records.csv").read_bytes())
    records_match = recs[0] == recs[1]

    ok = trajectories_match and records_match
    report(8, ok, f"byte-identical outputs: trajectory={trajectories_match}, "
                  f"records={records_match}")
    assert ok
