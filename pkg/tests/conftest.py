import logging
from pathlib import Path

import pytest

from walras.config import get_settings
from walras.generator import generate_corpus
from walras.instance import fixture_e1, fixture_u1, fixture_x1, fixture_z0

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(autouse=True)
def quiet_settings(monkeypatch):
    """No log file during tests; settings re-read from the patched environment."""
    monkeypatch.setenv("WALRAS_LOG_FILE", "")
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()
    for handler in list(logging.root.handlers):
        logging.root.removeHandler(handler)


@pytest.fixture
def e1():
    return fixture_e1()


@pytest.fixture
def u1():
    return fixture_u1()


@pytest.fixture
def x1():
    return fixture_x1()


@pytest.fixture
def z0():
    return fixture_z0()


@pytest.fixture
def fixture_path():
    def path(name: str) -> str:
        return str(FIXTURE_DIR / f"{name}.json")

    return path


@pytest.fixture(scope="session")
def small_corpus():
    """Reduced corpus for the default run."""
    return generate_corpus(12, seed=2024, max_items=2, max_bidders=3, max_value=2)
