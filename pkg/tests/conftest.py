import json
from importlib import resources

import pytest

from soarplan import AircraftParams, load_environment
from soarplan.energy import load_aircraft


def read_default(name: str) -> str:
    return resources.files("soarplan.data").joinpath(name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def default_env():
    return load_environment(read_default("environment.json"))


@pytest.fixture(scope="session")
def default_aircraft() -> AircraftParams:
    return load_aircraft(read_default("aircraft.json"))


@pytest.fixture(scope="session")
def default_env_doc() -> dict:
    return json.loads(read_default("environment.json"))
