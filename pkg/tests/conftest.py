import pathlib

import pytest

from tasktalk.engine import Engine
from tasktalk.state import InMemoryStateStore

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture()
def engine():
    return Engine(store=InMemoryStateStore(), log_sink=lambda record: None)


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES
