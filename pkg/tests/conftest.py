"""Shared fixtures and tower factories for the test suite."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import pytest

from gztower.matcore import DEFAULT_TOL, Tolerance
from gztower.tower import Tower, random_entries, random_theta_tower


@lru_cache(maxsize=None)
def theta_tower(depth: int, seed: int, scale: float = 0.5) -> Tower:
    """Cached spectrum-disjoint random tower."""
    return random_theta_tower(depth, seed, scale)


@lru_cache(maxsize=None)
def plain_tower(depth: int, seed: int, scale: float = 1.0) -> Tower:
    """Cached unconstrained random tower (no spectrum condition)."""
    rng = np.random.Generator(np.random.PCG64(seed))
    return Tower(random_entries(rng, (depth, depth), scale))


def jordan_tower(depth: int) -> Tower:
    """The nilpotent shift tower: strongly regular with every consecutive
    spectrum equal to {0}, the standard non-generic fixture."""
    return Tower(np.diag(np.ones(depth - 1), 1).astype(np.complex128)) if depth > 1 else Tower(
        np.zeros((1, 1), dtype=np.complex128)
    )


def diag_tower(values) -> Tower:
    return Tower(np.diag(np.asarray(values, dtype=np.complex128)))


def unit(n: int, k: int, l: int) -> np.ndarray:
    out = np.zeros((n, n), dtype=np.complex128)
    out[k, l] = 1.0
    return out


@pytest.fixture
def tol() -> Tolerance:
    return DEFAULT_TOL
