"""Shared fixtures for the bundled miniature corpus."""

from __future__ import annotations

from pathlib import Path

import pytest

from testlib import CORPUS_EXPORT, CORPUS_SRC


@pytest.fixture(scope="session")
def corpus_src() -> Path:
    return CORPUS_SRC


@pytest.fixture(scope="session")
def corpus_export() -> Path:
    return CORPUS_EXPORT
