"""Shared helpers for the test suite."""

from pathlib import Path

import pytest

DATA_DIR = Path(__file__).parent / "data"


def read_fixture(name: str) -> str:
    return (DATA_DIR / name).read_text(encoding="utf-8")


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR
