"""Group actions on towers: the abelian flow group and the adjoint action.

The abelian group C^(n(n-1)/2) acts by conjugating the deepest matrix
with the ordered product of exponentials

    g = exp(1 t_{11} Id_1) exp(1 t_{21} Id_2) exp(2 t_{22} X_2) ...

taken over indices (i, j), 1 <= j <= i <= n-1, in ascending lexicographic
order with all corner powers X_i^(j-1) read off the *input* tower.  With
that order the product is the closed form of composing the individual
Hamiltonian flows, so applying parameters in separate steps (each step
re-reading its corners) lands on the same point and the action is
abelian.  Permuting the raw matrix factors, by contrast, is not an
equivalent operation.

Sign convention: the Hamiltonian tangent of f_{ij} is -[j X_i^(j-1), X],
so its exact flow conjugates by exp(-t j X_i^(j-1)), while the group
action uses +t; slotwise, acting by t equals flowing by -t.  Orbits
coincide either way.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .gz import GZIndex, gz_hamiltonian, gz_indices
from .matcore import (
    DEFAULT_TOL,
    as_cmatrix,
    embed,
    embed_group,
    mat_exp,
    mat_pow,
)
from .tower import Tower, TowerTangent

__all__ = [
    "AParams",
    "GroupElement",
    "zero_params",
    "random_params",
    "params_to_dict",
    "params_from_dict",
    "params_to_json",
    "params_from_json",
    "a_act",
    "a_act_stepwise",
    "gl_adjoint",
    "flow",
    "orbit_tangents_A",
    "orbit_tangents_G",
    "zn_element",
]


@dataclass(frozen=True)
class AParams:
    """A point of the abelian group: the triangular array t_{ij}, 1 <= j <= i <= n-1."""

    n: int
    t: tuple[tuple[complex, ...], ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("group level n must be at least 1")
        rows = tuple(tuple(complex(x) for x in row) for row in self.t)
        if len(rows) != self.n - 1 or any(len(rows[i]) != i + 1 for i in range(len(rows))):
            raise ValueError(
                f"parameter array must have rows of lengths 1..{self.n - 1}"
            )
        object.__setattr__(self, "t", rows)

    def get(self, i: int, j: int) -> complex:
        if not 1 <= j <= i <= self.n - 1:
            raise IndexError(f"parameter index ({i}, {j}) out of range for n={self.n}")
        return self.t[i - 1][j - 1]

    def __add__(self, other: "AParams") -> "AParams":
        if self.n != other.n:
            raise ValueError("cannot add parameters of different levels")
        return AParams(
            self.n,
            tuple(
                tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(self.t, other.t)
            ),
        )


def zero_params(n: int) -> AParams:
    return AParams(n, tuple(tuple(0j for _ in range(i)) for i in range(1, n)))


def random_params(rng: np.random.Generator, n: int, scale: float = 1.0) -> AParams:
    rows = []
    for i in range(1, n):
        re = rng.standard_normal(i)
        im = rng.standard_normal(i)
        rows.append(tuple(scale * complex(a, b) / np.sqrt(2.0) for a, b in zip(re, im)))
    return AParams(n, tuple(rows))


def params_to_dict(a: AParams) -> dict:
    return {
        "n": a.n,
        "t": [[[z.real, z.imag] for z in row] for row in a.t],
    }


def params_from_dict(data: dict) -> AParams:
    try:
        n = int(data["n"])
        rows = tuple(
            tuple(complex(re, im) for re, im in row) for row in data["t"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed parameter data: {exc}") from exc
    return AParams(n, rows)


def params_to_json(a: AParams) -> str:
    return json.dumps(params_to_dict(a), sort_keys=True)


def params_from_json(text: str) -> AParams:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON: {exc}") from exc
    return params_from_dict(data)


@dataclass(frozen=True, eq=False)
class GroupElement:
    """An invertible matrix at a fixed level of the group tower."""

    level: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = as_cmatrix(self.matrix)
        if m.shape[0] != self.level:
            raise ValueError("matrix dimension must equal the group level")
        s = np.linalg.svd(m, compute_uv=False)
        if s[-1] <= DEFAULT_TOL.threshold(s[0]):
            raise ValueError("group element is numerically singular")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)


def _conjugate(g: np.ndarray, X: np.ndarray) -> np.ndarray:
    # g X g^{-1} via a solve on the right factor.
    Y = g @ X
    try:
        return np.linalg.solve(g.T, Y.T).T
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            "conjugator is numerically singular; the exponential factors are "
            "too ill-conditioned at this scale"
        ) from exc


def _action_product(a: AParams, T: Tower, N: int) -> np.ndarray:
    """Ordered product of the action's exponential factors at level N.

    Factors ascend lexicographically in (i, j); every corner power is
    taken from the input tower.
    """
    g = np.eye(N, dtype=np.complex128)
    for i in range(1, a.n):
        Xi = T.level(i)
        powers = np.eye(i, dtype=np.complex128)
        for j in range(1, i + 1):
            factor = mat_exp(embed(j * a.get(i, j) * powers, N))
            g = g @ factor
            powers = powers @ Xi
    return g


def a_act(a: AParams, T: Tower) -> Tower:
    """Act on a tower by the abelian group element with parameters ``a``.

    Requires a.n <= depth + 1 (the factors read corners up to level
    a.n - 1).  Zero parameters act as the exact identity.
    """
    if a.n > T.depth + 1:
        raise IndexError(
            f"parameter level {a.n} needs corners up to {a.n - 1}, "
            f"but the tower has depth {T.depth}"
        )
    g = _action_product(a, T, T.depth)
    if not np.all(np.isfinite(g)):
        raise OverflowError("action factors overflowed; reduce parameters or scale")
    return Tower(_conjugate(g, T.top))


def a_act_stepwise(a: AParams, T: Tower, order: list[GZIndex] | None = None) -> Tower:
    """Apply the action one parameter at a time, in the given order.

    Each step is a full single-parameter action reading its corner powers
    off the current point.  Because the underlying flows commute, any
    order lands on the same point as :func:`a_act`; this entry point
    exists to exercise exactly that property.
    """
    keys = order if order is not None else gz_indices(a.n - 1)
    seen = set()
    for idx in keys:
        if not 1 <= idx.j <= idx.i <= a.n - 1 or idx in seen:
            raise ValueError("order must enumerate each parameter index exactly once")
        seen.add(idx)
    if len(seen) != a.n * (a.n - 1) // 2:
        raise ValueError("order must cover all parameter indices")
    current = T
    for idx in keys:
        single = zero_params(a.n)
        rows = [list(row) for row in single.t]
        rows[idx.i - 1][idx.j - 1] = a.get(idx.i, idx.j)
        current = a_act(AParams(a.n, tuple(tuple(r) for r in rows)), current)
    return current


def gl_adjoint(g: GroupElement, T: Tower) -> Tower:
    """Conjugate the tower by ``diag(g, Id)`` at the deepest level."""
    if g.level > T.depth:
        raise IndexError(f"group level {g.level} exceeds tower depth {T.depth}")
    G = embed_group(g.matrix, T.depth)
    return Tower(_conjugate(G, T.top))


def flow(T: Tower, idx: GZIndex, t: complex) -> Tower:
    """Exact Hamiltonian flow of f_{ij} for time t.

    A single conjugation by ``exp(-t j X_i^(j-1))``: the generator is
    constant along its own flow, so no stepping is needed.  The corner
    X_i (and everything below) is fixed; all observables tr(X_k^l) are
    conserved.  Flowing a top-level index is allowed and acts trivially.
    """
    if idx.i > T.depth:
        raise IndexError(f"index level {idx.i} exceeds tower depth {T.depth}")
    P = embed(idx.j * mat_pow(T.level(idx.i), idx.j - 1), T.depth)
    g = mat_exp(-complex(t) * P)
    if not np.all(np.isfinite(g)):
        raise OverflowError("flow conjugator overflowed; reduce |t| or the tower scale")
    return Tower(_conjugate(g, T.top))


def orbit_tangents_A(T: Tower) -> list[TowerTangent]:
    """The N(N-1)/2 Hamiltonian tangents spanning the abelian orbit direction."""
    if T.depth < 2:
        raise ValueError("abelian orbit tangents need depth at least 2")
    return [gz_hamiltonian(T, idx) for idx in gz_indices(T.depth, max_i=T.depth - 1)]


def orbit_tangents_G(T: Tower, basis_limit: int | None = None) -> list[TowerTangent]:
    """Adjoint-orbit tangents generated by matrix units at the deepest level.

    The spanned space at level N is the image of ``Z -> [Z, X(N)]``,
    of dimension N^2 - N at regular matrices.
    """
    N = T.depth
    out: list[TowerTangent] = []
    for k in range(N):
        for l in range(N):
            unit = np.zeros((N, N), dtype=np.complex128)
            unit[k, l] = 1.0
            out.append(TowerTangent(tower=T, base_level=N, generator=unit))
            if basis_limit is not None and len(out) >= basis_limit:
                return out
    return out


def zn_element(T: Tower, a: AParams) -> GroupElement:
    """The centralizer-product group element realizing the abelian action.

    The product of the per-level factors lies in
    Z(X_1) Z(X_2) ... Z(X_{n-1}); each factor is an exponential of a
    polynomial in its level's corner and therefore commutes with it.
    Its adjoint action reproduces :func:`a_act` on the same parameters.
    """
    if a.n > T.depth:
        raise IndexError(f"parameter level {a.n} exceeds tower depth {T.depth}")
    return GroupElement(T.depth, _action_product(a, T, T.depth))
