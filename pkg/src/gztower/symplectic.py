"""Orbit symplectic geometry via the trace pairing.

On a (co)adjoint orbit through M, tangent vectors are commutators
``[Z, M]`` and the Kostant-Kirillov form pairs them by
``tr(M [Z1, Z2])``.  Gluing the level forms over a tower is consistent
because the trace of a product against an embedded matrix only sees the
matching corner; the glued form is therefore independent of the
evaluation level, which :func:`match_residual` measures directly.

The anchor map sends a level-n covector x to the tangent with values
``-[embed(x, k), X(k)]``; its image spans the orbit directions.  At
strongly regular towers the abelian orbit tangents are isotropic and of
exactly half the orbit rank: the Lagrangian verification checks both.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .gz import GZIndex, gz_indices
from .matcore import (
    DEFAULT_TOL,
    Tolerance,
    as_cmatrix,
    commutator,
    embed,
    mat_pow,
    rank_split,
    trace_pair,
)
from .regularity import sreg_report
from .tower import Tower, TowerTangent

__all__ = [
    "OrbitTangent",
    "kk_form",
    "omega_inf",
    "match_residual",
    "anchor",
    "hamiltonian_orbit_tangent",
    "orbit_tangent_of",
    "isotropy_check",
    "LagrangianReport",
    "lagrangian_check",
    "pairing_matrix",
]


@dataclass(frozen=True, eq=False)
class OrbitTangent:
    """Orbit tangent represented by a level and a generator ``rep``.

    The tangent value at level ``k >= level`` is ``[embed(rep, k), X(k)]``;
    corners of deeper values reproduce shallower ones by construction.
    """

    level: int
    rep: np.ndarray

    def __post_init__(self) -> None:
        m = as_cmatrix(self.rep)
        if m.shape[0] != self.level:
            raise ValueError("representative dimension must equal the level")
        m.flags.writeable = False
        object.__setattr__(self, "rep", m)

    def value(self, T: Tower, k: int) -> np.ndarray:
        if not self.level <= k <= T.depth:
            raise IndexError(f"need level {self.level} <= k <= depth {T.depth}")
        return commutator(embed(self.rep, k), T.level(k))


def kk_form(M: np.ndarray, Z1: np.ndarray, Z2: np.ndarray) -> complex:
    """Kostant-Kirillov pairing of the tangents [Z1, M] and [Z2, M]: tr(M [Z1, Z2])."""
    return trace_pair(M, commutator(Z1, Z2))


def omega_inf(T: Tower, V1: OrbitTangent, V2: OrbitTangent) -> complex:
    """The glued orbit form evaluated at the deeper of the two levels.

    Level consistency makes the choice of evaluation level immaterial up
    to rounding; see :func:`match_residual`.
    """
    k = max(V1.level, V2.level)
    if k > T.depth:
        raise IndexError(f"tangent level {k} exceeds tower depth {T.depth}")
    return kk_form(T.level(k), embed(V1.rep, k), embed(V2.rep, k))


def match_residual(T: Tower, Z1: np.ndarray, Z2: np.ndarray, n: int) -> float:
    """Gluing defect between levels n and n+1 for level-n representatives.

    Mathematically zero: the deeper matrix restricts to the shallower one
    on the corner the embedded commutator lives in.
    """
    Z1 = as_cmatrix(Z1)
    Z2 = as_cmatrix(Z2)
    if Z1.shape != Z2.shape or Z1.shape[0] != n:
        raise ValueError("representatives must both have dimension n")
    if n >= T.depth:
        raise IndexError(f"need n < depth, got n={n}, depth={T.depth}")
    deep = kk_form(T.level(n + 1), embed(Z1, n + 1), embed(Z2, n + 1))
    shallow = kk_form(T.level(n), Z1, Z2)
    return abs(deep - shallow)


def anchor(T: Tower, x: np.ndarray) -> OrbitTangent:
    """Anchor-map image of the level-n covector x: the tangent -[x, X(.)].

    The images over all covectors span the characteristic (orbit)
    directions at the tower.
    """
    x = as_cmatrix(x)
    if x.shape[0] > T.depth:
        raise IndexError(f"covector level {x.shape[0]} exceeds tower depth {T.depth}")
    return OrbitTangent(level=x.shape[0], rep=-x)


def hamiltonian_orbit_tangent(T: Tower, idx: GZIndex) -> OrbitTangent:
    """The Hamiltonian tangent of f_{ij} as an orbit tangent (rep = -j X_i^(j-1))."""
    if idx.i > T.depth:
        raise IndexError(f"index level {idx.i} exceeds tower depth {T.depth}")
    return anchor(T, idx.j * mat_pow(T.level(idx.i), idx.j - 1))


def orbit_tangent_of(V: TowerTangent) -> OrbitTangent:
    """Convert a tower tangent to its orbit-tangent representative."""
    return OrbitTangent(level=V.base_level, rep=-np.asarray(V.generator))


def isotropy_check(
    T: Tower, tangents: Sequence[OrbitTangent], tol: Tolerance = DEFAULT_TOL
) -> float:
    """Maximum absolute pairing over all pairs of the given tangents.

    The family is isotropic when the result is below the caller's
    threshold; self-pairings vanish identically.
    """
    worst = 0.0
    for a in range(len(tangents)):
        for b in range(a + 1, len(tangents)):
            worst = max(worst, abs(omega_inf(T, tangents[a], tangents[b])))
    return worst


def pairing_matrix(T: Tower, tangents: Sequence[OrbitTangent]) -> np.ndarray:
    """Antisymmetric matrix of pairwise ``omega_inf`` values."""
    m = len(tangents)
    P = np.zeros((m, m), dtype=np.complex128)
    for a in range(m):
        for b in range(a + 1, m):
            val = omega_inf(T, tangents[a], tangents[b])
            P[a, b] = val
            P[b, a] = -val
    return P


@dataclass(frozen=True)
class LagrangianReport:
    depth: int
    rank_A: Optional[int]
    rank_G: Optional[int]
    max_pairing: Optional[float]
    pairing_scale: Optional[float]
    verdict: str  # "true" | "false" | "not applicable"
    tol_rel: float
    tol_abs: float
    isotropy_rtol: float
    notes: tuple[str, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "depth": self.depth,
            "rank_A": self.rank_A,
            "rank_G": self.rank_G,
            "max_pairing": self.max_pairing,
            "pairing_scale": self.pairing_scale,
            "verdict": self.verdict,
            "tolerance": {"rel": self.tol_rel, "abs": self.tol_abs},
            "isotropy_rtol": self.isotropy_rtol,
            "notes": list(self.notes),
        }


def lagrangian_check(
    T: Tower, tol: Tolerance = DEFAULT_TOL, isotropy_rtol: float = 1e-8
) -> LagrangianReport:
    """Verify the Lagrangian structure of the abelian orbit at a tower.

    At a strongly regular tower of depth N this checks, at the deepest
    level: the abelian tangent family has rank exactly N(N-1)/2, the
    orbit tangent family has rank exactly N^2 - N (half/double), and the
    abelian family is isotropic for the glued form.  Towers that are not
    strongly regular (or have depth 1) yield a "not applicable" verdict
    rather than an error.
    """
    N = T.depth
    base = dict(
        depth=N,
        tol_rel=tol.rel,
        tol_abs=tol.abs,
        isotropy_rtol=isotropy_rtol,
    )
    if N < 2:
        return LagrangianReport(
            rank_A=None,
            rank_G=None,
            max_pairing=None,
            pairing_scale=None,
            verdict="not applicable",
            notes=("depth-1 towers have no abelian orbit directions",),
            **base,
        )
    sreg = sreg_report(T, tol)
    if sreg.verdict != "true":
        return LagrangianReport(
            rank_A=None,
            rank_G=None,
            max_pairing=None,
            pairing_scale=None,
            verdict="not applicable",
            notes=(f"tower is not strongly regular (verdict: {sreg.verdict})",),
            **base,
        )

    ham_tangents = [
        hamiltonian_orbit_tangent(T, idx) for idx in gz_indices(N, max_i=N - 1)
    ]
    a_values = [v.value(T, N) for v in ham_tangents]
    rank_A, _, _ = rank_split(a_values, tol)

    g_values = []
    unit = np.zeros((N, N), dtype=np.complex128)
    for k in range(N):
        for l in range(N):
            unit[k, l] = 1.0
            g_values.append(commutator(unit.copy(), T.level(N)))
            unit[k, l] = 0.0
    rank_G, _, _ = rank_split(g_values, tol)

    max_pairing = isotropy_check(T, ham_tangents, tol)
    # |tr(X [Z1, Z2])| <= 2 ||X|| ||Z1|| ||Z2||: the cancellation error of
    # an exactly-zero pairing scales with the same product.
    rep_norm = max(float(np.linalg.norm(v.rep)) for v in ham_tangents)
    pairing_scale = 1.0 + 2.0 * float(np.linalg.norm(T.top)) * rep_norm**2

    ok = (
        rank_A == N * (N - 1) // 2
        and rank_G == N * N - N
        and 2 * rank_A == rank_G
        and max_pairing <= isotropy_rtol * pairing_scale
    )
    return LagrangianReport(
        rank_A=rank_A,
        rank_G=rank_G,
        max_pairing=max_pairing,
        pairing_scale=pairing_scale,
        verdict="true" if ok else "false",
        **base,
    )


def lagrangian_report_to_json(report: LagrangianReport) -> str:
    return json.dumps(report.to_json_dict(), sort_keys=True)
