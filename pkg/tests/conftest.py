import json
from pathlib import Path

import pytest

from hypodb import build, load_project
from hypodb import state as state_mod

DEMO_MANIFEST = Path(__file__).resolve().parent.parent / "demo" / "freefall" / "manifest.toml"


@pytest.fixture(scope="session")
def demo_manifest() -> Path:
    return DEMO_MANIFEST


@pytest.fixture(scope="session")
def demo_project(demo_manifest):
    return load_project(str(demo_manifest))


@pytest.fixture(scope="session")
def built_engine_session(demo_project):
    """One shared built engine; tests that mutate must use `engine` instead."""
    return build(demo_project)


@pytest.fixture()
def engine(demo_project):
    """A freshly built engine, safe to mutate (conditioning, write-back)."""
    return build(demo_project)


@pytest.fixture()
def state_file(tmp_path, engine):
    path = tmp_path / "state.json"
    state_mod.save(engine, str(path))
    return path
