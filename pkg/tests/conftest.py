"""Shared fixtures.

Eigen-data lives in a session-wide store under tests/_cache (override with
VERTMASS_TEST_CACHE).  The store builds missing weights on first use, so a
cold run spends half a minute on exact basis computations and later runs
read the cached tables back.
"""

from __future__ import annotations

import os

import pytest

from vertmass.bumps import mean_zero_bump, symmetric_bump
from vertmass.forms import EigenStore

CACHE_DIR = os.environ.get(
    "VERTMASS_TEST_CACHE", os.path.join(os.path.dirname(__file__), "_cache")
)


@pytest.fixture(scope="session")
def store() -> EigenStore:
    return EigenStore(CACHE_DIR)


@pytest.fixture(scope="session")
def cache_dir() -> str:
    return CACHE_DIR


@pytest.fixture(scope="session")
def psi():
    return symmetric_bump(2.0)


@pytest.fixture(scope="session")
def psi_mz():
    return mean_zero_bump(2.0)


@pytest.fixture(scope="session")
def delta(store):
    """The weight-12 form."""
    return store.get(12)[0]
