import json
import math

import pytest

from soarplan import ConfigError, State, load_environment, save_environment
from tests.conftest import read_default


def doc_with(default_env_doc, **changes) -> str:
    doc = json.loads(json.dumps(default_env_doc))
    doc.update(changes)
    return json.dumps(doc)


def test_default_environment_loads(default_env):
    assert len(default_env.wind.thermals) == 1
    assert default_env.start.height == 200.0
    assert default_env.goal.radius == 50.0
    assert default_env.bounds.north_max == 1500.0


def test_round_trip(default_env):
    text = save_environment(default_env)
    again = load_environment(text)
    assert again == default_env
    assert save_environment(again) == text


def test_invalid_thermal_radius_names_field(default_env_doc):
    doc = json.loads(json.dumps(default_env_doc))
    doc["thermals"][0]["radius"] = -5.0
    with pytest.raises(ConfigError, match=r"thermals\[0\].*radius"):
        load_environment(json.dumps(doc))


def test_missing_ambient_defaults_to_calm(default_env_doc):
    doc = json.loads(json.dumps(default_env_doc))
    del doc["ambient_wind"]
    env = load_environment(json.dumps(doc))
    assert env.wind.ambient.w_north == 0.0
    assert env.wind.ambient.w_east == 0.0
    assert env.wind.ambient.w_down == 0.0


def test_missing_required_field(default_env_doc):
    doc = json.loads(json.dumps(default_env_doc))
    del doc["start"]
    with pytest.raises(ConfigError, match="start"):
        load_environment(json.dumps(doc))
    doc = json.loads(json.dumps(default_env_doc))
    del doc["goal"]["radius"]
    with pytest.raises(ConfigError, match=r"goal\.radius"):
        load_environment(json.dumps(doc))


def test_wrong_version_rejected(default_env_doc):
    with pytest.raises(ConfigError, match="version"):
        load_environment(doc_with(default_env_doc, version=99))


def test_parse_error_reports_location():
    text = read_default("environment.json").replace("{", "", 1)
    with pytest.raises(ConfigError, match=r"line|column|char"):
        load_environment(text)


def test_non_numeric_field_rejected(default_env_doc):
    doc = json.loads(json.dumps(default_env_doc))
    doc["goal"]["radius"] = "fifty"
    with pytest.raises(ConfigError, match=r"goal\.radius"):
        load_environment(json.dumps(doc))


def test_goal_region_contains(default_env):
    goal = default_env.goal
    assert goal.contains(State(goal.north, goal.east, 1.0, goal.height))
    assert goal.contains(State(goal.north + goal.radius, goal.east, 0, goal.height))
    assert not goal.contains(State(goal.north + goal.radius + 1e-6, goal.east, 0, goal.height))


def test_bounds_contains(default_env):
    b = default_env.bounds
    assert b.contains(0, 0, 0)
    assert b.contains(1500, 1500, 600)
    assert not b.contains(-0.1, 0, 0)
    assert not b.contains(0, 0, 600.1)


def test_course_round_trips_in_degrees(default_env_doc):
    doc = json.loads(json.dumps(default_env_doc))
    doc["start"]["course_deg"] = 90.0
    env = load_environment(json.dumps(doc))
    assert env.start.course == pytest.approx(math.pi / 2)
    saved = json.loads(save_environment(env))
    assert saved["start"]["course_deg"] == pytest.approx(90.0)
