import itertools
import math
from collections import Counter

import numpy as np
import pytest

from soarplan import (
    ContinuousSampler,
    ControlEnvelope,
    PrimitiveConfig,
    PrimitiveKind,
    PrimitiveSampler,
    State,
    WindField,
    enumerate_primitives,
    make_sampler,
    propagate,
    to_control_sequence,
    wrap_angle,
)

CFG = PrimitiveConfig()
CALM = WindField()


@pytest.fixture(scope="module")
def library():
    return enumerate_primitives(CFG)


def test_library_cardinality(library):
    assert len(library) == 174
    counts = Counter(p.kind for p in library)
    assert counts[PrimitiveKind.STRAIGHT] == 10
    assert counts[PrimitiveKind.CURVE] == 60
    assert counts[PrimitiveKind.SPIRAL] == 80
    assert counts[PrimitiveKind.SPLINE] == 24


def test_ids_are_a_permutation(library):
    assert sorted(p.id for p in library) == list(range(174))


def test_straight_count_oracle(library):
    # |speeds| x |flight path angles|
    speeds = {p.airspeed for p in library}
    gammas = {p.flight_path_angle for p in library if p.kind is PrimitiveKind.STRAIGHT}
    assert len(speeds) * len(gammas) == 10
    assert speeds == {10.0, 20.0}


def test_spline_count_matches_combinatorial_oracle(library):
    # ordered pairs of distinct values from a 4-element set, per speed
    values = [math.radians(d) for d in (-90.0, -60.0, 60.0, 90.0)]
    expected_pairs = {
        (a, b) for a, b in itertools.product(values, repeat=2) if a != b
    }
    assert len(expected_pairs) == 12
    splines = [p for p in library if p.kind is PrimitiveKind.SPLINE]
    for speed in (10.0, 20.0):
        pairs = {
            (p.turn_first_half, p.turn_second_half)
            for p in splines if p.airspeed == speed
        }
        assert pairs == expected_pairs  # identical radians conversions, exact floats
        assert len(pairs) == 12
    assert len(splines) == 24


def test_turn_sets(library):
    curve_turns = {round(math.degrees(p.total_turn)) for p in library
                   if p.kind is PrimitiveKind.CURVE}
    assert curve_turns == {-90, -60, -30, 30, 60, 90}
    spiral_turns = {round(math.degrees(p.total_turn)) for p in library
                    if p.kind is PrimitiveKind.SPIRAL}
    assert spiral_turns == {-1080, -720, -360, -180, 180, 360, 720, 1080}
    gamma_set = {round(math.degrees(p.flight_path_angle)) for p in library
                 if p.kind is not PrimitiveKind.SPLINE}
    assert gamma_set == {-45, -15, 0, 15, 45}
    assert all(p.flight_path_angle == 0.0 for p in library
               if p.kind is PrimitiveKind.SPLINE)


def test_curve_sequence_rate(library):
    curve = next(p for p in library
                 if p.kind is PrimitiveKind.CURVE and p.airspeed == 10.0
                 and math.degrees(p.total_turn) == pytest.approx(90.0)
                 and p.flight_path_angle == 0.0)
    seq = to_control_sequence(curve, CFG)
    rate = math.radians(90.0) / CFG.segment_duration
    assert seq.n_steps == 10
    for u, dt in seq.steps:
        assert u.turn_rate == pytest.approx(rate, rel=1e-15)
        assert u.turn_rate == pytest.approx(math.radians(9.0), rel=1e-12)
        assert u.airspeed == 10.0
        assert dt == pytest.approx(1.0)


def test_straight_sequence_constant(library):
    straight = next(p for p in library
                    if p.kind is PrimitiveKind.STRAIGHT and p.airspeed == 20.0
                    and math.degrees(p.flight_path_angle) == pytest.approx(15.0))
    seq = to_control_sequence(straight, CFG)
    for u, _ in seq.steps:
        assert (u.airspeed, u.turn_rate) == (20.0, 0.0)
        assert u.flight_path_angle == pytest.approx(math.radians(15.0))


def test_spline_sequence_two_rates(library):
    spline = next(p for p in library
                  if p.kind is PrimitiveKind.SPLINE and p.airspeed == 10.0
                  and math.degrees(p.turn_first_half) == pytest.approx(90.0)
                  and math.degrees(p.turn_second_half) == pytest.approx(-60.0))
    seq = to_control_sequence(spline, CFG)
    rates = [u.turn_rate for u, _ in seq.steps]
    # each half realizes its total over T_s / 2
    assert rates[:5] == pytest.approx([math.radians(18.0)] * 5, rel=1e-12)
    assert rates[5:] == pytest.approx([math.radians(-12.0)] * 5, rel=1e-12)


def test_round_trip_heading_change(library):
    for p in library:
        seq = to_control_sequence(p, CFG)
        seg = propagate(State(0, 0, 0, 500), seq, CALM, 4)
        expected = wrap_angle(p.total_turn)
        assert abs(wrap_angle(seg.end_state.course - expected)) < 1e-12, p


def test_spline_flatness(library):
    for p in library:
        if p.kind is not PrimitiveKind.SPLINE:
            continue
        seq = to_control_sequence(p, CFG)
        seg = propagate(State(0, 0, 0.7, 300), seq, CALM, 5)
        assert seg.end_state.height == 300.0  # gamma = 0: exact


def test_envelope_hull(library):
    env = ControlEnvelope.from_config(CFG)
    max_rate_seen = 0.0
    for p in library:
        for u, _ in to_control_sequence(p, CFG).steps:
            assert env.contains(u), p
            max_rate_seen = max(max_rate_seen, abs(u.turn_rate))
    assert max_rate_seen == pytest.approx(env.turn_rate_max, rel=1e-12)
    assert env.turn_rate_max == pytest.approx(math.radians(1080.0) / CFG.segment_duration)
    assert (env.airspeed_min, env.airspeed_max) == (10.0, 20.0)
    assert env.flight_path_angle_max == pytest.approx(math.radians(45.0))


def test_primitive_config_validation():
    with pytest.raises(ValueError):
        PrimitiveConfig(segment_duration=0.0)
    with pytest.raises(ValueError):
        PrimitiveConfig(steps_per_segment=7)   # odd: spline half-split needs even N
    with pytest.raises(ValueError):
        PrimitiveConfig(steps_per_segment=0)


def test_primitive_sampler_deterministic():
    sampler = PrimitiveSampler(CFG)
    ids_a = [sampler.sample(np.random.default_rng(42)).id for _ in range(1)]
    draws_a = [sampler.sample_array(np.random.default_rng(42))[1] for _ in range(1)]
    rng1, rng2 = np.random.default_rng(7), np.random.default_rng(7)
    seq1 = [sampler.sample(rng1).id for _ in range(100)]
    seq2 = [sampler.sample(rng2).id for _ in range(100)]
    assert seq1 == seq2
    assert ids_a == draws_a


def test_primitive_sampler_uniformity():
    sampler = PrimitiveSampler(CFG)
    rng = np.random.default_rng(123)
    n_draws = 174_000
    drawn = np.fromiter((sampler.sample_array(rng)[1] for _ in range(n_draws)), dtype=np.int64)
    counts = np.bincount(drawn, minlength=174)
    expected = n_draws / 174
    sigma = math.sqrt(n_draws * (1 / 174) * (1 - 1 / 174))
    assert counts.shape[0] == 174
    assert np.all(np.abs(counts - expected) <= 5 * sigma)


def test_empty_library_rejected():
    with pytest.raises(ValueError):
        PrimitiveSampler(CFG, primitives=[])


def test_continuous_sampler_box_and_mean():
    sampler = ContinuousSampler(CFG)
    env = sampler.envelope
    rng = np.random.default_rng(5)
    n_draws = 100_000
    speeds = np.empty(n_draws)
    for i in range(n_draws):
        arr, tag = sampler.sample_array(rng)
        assert tag == -1
        assert env.airspeed_min <= arr[0, 0] <= env.airspeed_max
        assert abs(arr[0, 1]) <= env.turn_rate_max
        assert abs(arr[0, 2]) <= env.flight_path_angle_max
        assert np.all(arr == arr[0])  # constant control held over all steps
        speeds[i] = arr[0, 0]
    sigma_mean = (10.0 / math.sqrt(12.0)) / math.sqrt(n_draws)
    assert abs(speeds.mean() - 15.0) <= 3 * sigma_mean


def test_continuous_sampler_deterministic():
    sampler = ContinuousSampler(CFG)
    a = [sampler.sample(np.random.default_rng(9)).controls[0] for _ in range(1)]
    b = [sampler.sample(np.random.default_rng(9)).controls[0] for _ in range(1)]
    assert a == b


def test_make_sampler():
    assert isinstance(make_sampler("primitive", CFG), PrimitiveSampler)
    assert isinstance(make_sampler("continuous", CFG), ContinuousSampler)
    with pytest.raises(ValueError):
        make_sampler("magic", CFG)
