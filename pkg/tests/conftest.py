"""Shared fixtures for the magrobin test-suite."""

import pytest

from magrobin.config.settings import reset_settings
from magrobin.fixtures import FixtureStore


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Every test starts from the environment defaults."""
    for name in ("MAGROBIN_WORKERS", "MAGROBIN_LOG_FILE", "MAGROBIN_DENSE_LIMIT"):
        monkeypatch.delenv(name, raising=False)
    reset_settings()
    yield
    reset_settings()


@pytest.fixture(scope="session")
def montgomery():
    """Montgomery minimum (nu0, zeta0), computed once per session."""
    store = FixtureStore()
    return store.value("nu0"), store.value("zeta0")


@pytest.fixture
def output_dir(tmp_path):
    path = tmp_path / "out"
    path.mkdir()
    return path
