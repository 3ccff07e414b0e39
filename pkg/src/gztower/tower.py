"""Corner-compatible matrix towers.

A tower of depth N is a point of the inverse system
``gl(1) <- gl(2) <- ... <- gl(N)`` whose transition maps take upper-left
corners.  Because every shallower level is forced to be a corner of the
deepest matrix, a tower stores only its deepest level; corner
compatibility then holds exactly, never approximately.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .matcore import DEFAULT_TOL, Tolerance, as_cmatrix, commutator, corner, embed, spectra_disjoint

__all__ = [
    "GenerationError",
    "Tower",
    "TowerTangent",
    "new_tower",
    "extend",
    "random_entries",
    "random_theta_tower",
    "tower_to_dict",
    "tower_from_dict",
    "tower_to_json",
    "tower_from_json",
    "RNG_ALGORITHM",
]

# Recorded in reports so runs are reproducible across machines.
RNG_ALGORITHM = "numpy.random.PCG64"


class GenerationError(RuntimeError):
    """Rejection sampling exhausted its retry budget."""


@dataclass(frozen=True, eq=False)
class Tower:
    """Finite-depth corner-compatible tower, stored by its deepest matrix."""

    top: np.ndarray

    def __post_init__(self) -> None:
        validated = as_cmatrix(self.top)
        validated.flags.writeable = False
        object.__setattr__(self, "top", validated)

    @property
    def depth(self) -> int:
        return self.top.shape[0]

    def level(self, n: int) -> np.ndarray:
        """The n-th matrix of the tower: the n x n corner of the top."""
        if not 1 <= n <= self.depth:
            raise IndexError(f"level {n} out of range for depth {self.depth}")
        return corner(self.top, n)

    def norm(self) -> float:
        return float(np.linalg.norm(self.top))


def new_tower(top) -> Tower:
    """Build a tower of depth ``top.dim`` from its deepest matrix."""
    return Tower(top)


def extend(T: Tower, border_col, border_row, corner_entry) -> Tower:
    """Deepen a tower by one level with the given border column/row/corner."""
    n = T.depth
    col = np.asarray(border_col, dtype=np.complex128)
    row = np.asarray(border_row, dtype=np.complex128)
    if col.shape != (n,) or row.shape != (n,):
        raise ValueError(f"border vectors must have length {n}")
    out = np.zeros((n + 1, n + 1), dtype=np.complex128)
    out[:n, :n] = T.top
    out[:n, n] = col
    out[n, :n] = row
    out[n, n] = complex(corner_entry)
    return Tower(out)


@dataclass(frozen=True, eq=False)
class TowerTangent:
    """Tangent vector to the space of towers, generated at a base level.

    The value at level ``k >= base_level`` is
    ``-[embed(generator, k), X(k)]``; values below the base level are
    literal corners of the base-level value, so compatibility there is
    exact by construction.  Above the base level the corner identity
    holds structurally (the embedded generator zeroes the border terms);
    recomputed values at different levels agree to rounding.
    """

    tower: Tower
    base_level: int
    generator: np.ndarray

    def __post_init__(self) -> None:
        gen = as_cmatrix(self.generator)
        if not 1 <= self.base_level <= self.tower.depth:
            raise IndexError("base level out of range")
        if gen.shape[0] != self.base_level:
            raise ValueError("generator dimension must equal the base level")
        gen.flags.writeable = False
        object.__setattr__(self, "generator", gen)

    def value(self, k: int) -> np.ndarray:
        if not 1 <= k <= self.tower.depth:
            raise IndexError(f"level {k} out of range for depth {self.tower.depth}")
        if k >= self.base_level:
            return -commutator(embed(self.generator, k), self.tower.level(k))
        return corner(self.value(self.base_level), k)


def random_entries(rng: np.random.Generator, shape, scale: float) -> np.ndarray:
    """Complex-Gaussian entries with magnitude clipped to ``scale``.

    Each entry is a standard complex Gaussian rescaled onto the closed
    disk of radius ``scale`` (entries beyond unit magnitude are projected
    to the circle).  Deterministic given the generator state.
    """
    g = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    mag = np.abs(g)
    g = np.where(mag > 1.0, g / np.maximum(mag, 1e-300), g)
    return scale * g


def random_theta_tower(
    depth: int,
    seed: int,
    scale: float = 1.0,
    tol: Tolerance = DEFAULT_TOL,
    max_retries: int = 100,
) -> Tower:
    """Random tower whose consecutive-level spectra are disjoint.

    Grows level by level; each new border is rejection-sampled until the
    Sylvester-operator test confirms the new level's spectrum avoids the
    previous one.  Failure after ``max_retries`` attempts on one level
    raises GenerationError (probability ~0 for continuous samples; the
    bound exists to prevent hangs).
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if scale <= 0:
        raise ValueError("scale must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    top = random_entries(rng, (1, 1), scale)
    while top.shape[0] < depth:
        n = top.shape[0]
        for _ in range(max_retries):
            cand = np.zeros((n + 1, n + 1), dtype=np.complex128)
            cand[:n, :n] = top
            cand[:n, n] = random_entries(rng, (n,), scale)
            cand[n, :n] = random_entries(rng, (n,), scale)
            cand[n, n] = complex(random_entries(rng, (), scale))
            if spectra_disjoint(top, cand, tol):
                top = cand
                break
        else:
            raise GenerationError(
                f"no spectrum-disjoint extension found at level {n} "
                f"after {max_retries} attempts"
            )
    return Tower(top)


def _complex_to_pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def tower_to_dict(T: Tower) -> dict:
    """JSON-ready dict: row-major entries as [re, im] pairs."""
    return {
        "depth": T.depth,
        "top": [[_complex_to_pair(z) for z in row] for row in T.top.tolist()],
    }


def tower_from_dict(data: dict) -> Tower:
    try:
        depth = int(data["depth"])
        rows = data["top"]
        top = np.array(
            [[complex(re, im) for re, im in row] for row in rows], dtype=np.complex128
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed tower data: {exc}") from exc
    T = Tower(top)
    if T.depth != depth:
        raise ValueError(f"declared depth {depth} does not match matrix size {T.depth}")
    return T


def tower_to_json(T: Tower) -> str:
    return json.dumps(tower_to_dict(T), sort_keys=True)


def tower_from_json(text: str) -> Tower:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON: {exc}") from exc
    return tower_from_dict(data)
