"""Shared pytest fixtures.

DATABASE_URL must point at a throwaway SQLite file before ``app`` is imported,
because the engine is created at import time.
"""

import os
import tempfile
from pathlib import Path

_DB_DIR = tempfile.mkdtemp(prefix="cifsim-test-")
os.environ["DATABASE_URL"] = f"sqlite+aiosqlite:///{_DB_DIR}/test.db"
os.environ.setdefault("FIXTURE_ROOT", str(Path(__file__).resolve().parent / "fixtures"))

import numpy as np  # noqa: E402
import pytest  # noqa: E402

FIXTURES = Path(__file__).resolve().parent / "fixtures"


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(2023)


@pytest.fixture
def fixture_root() -> Path:
    return FIXTURES


@pytest.fixture
def scenario_dir() -> Path:
    return FIXTURES / "scenarios"
