"""Brute-force oracles for cross-checking the main modules.

These deliberately share no code with the operations they validate: the
bracket oracle differentiates both observables numerically with its own
loops, the eigenvalue oracle goes through characteristic-polynomial
coefficients and simultaneous root iteration, and the kernel oracle is a
full-pivot Gaussian elimination.  Clarity over speed; dimensions are
capped at test scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .gz import SmoothFn
from .matcore import DEFAULT_TOL, Tolerance
from .tower import Tower

__all__ = [
    "ConvergenceError",
    "OracleResult",
    "ORACLE_METHODS",
    "run_oracle",
    "fd_poisson_bracket",
    "charpoly_coefficients",
    "charpoly_roots",
    "dense_kernel",
]

MAX_ORACLE_DIM = 8


class ConvergenceError(RuntimeError):
    """Root iteration failed to converge within the iteration budget."""


def _fd_gradient_raw(fn: SmoothFn, X: np.ndarray, n: int, h: float) -> np.ndarray:
    """Central-difference trace-form gradient, self-contained."""
    m = fn.level
    grad = np.zeros((n, n), dtype=np.complex128)
    pert = X[:m, :m].copy()
    for k in range(m):
        for l in range(m):
            orig = pert[l, k]
            pert[l, k] = orig + h
            fp = complex(fn.eval(pert))
            pert[l, k] = orig - h
            fm = complex(fn.eval(pert))
            pert[l, k] = orig
            grad[k, l] = (fp - fm) / (2.0 * h)
    return grad


def fd_poisson_bracket(
    f: SmoothFn, g: SmoothFn, T: Tower, h: float | None = None
) -> complex:
    """Bracket with *both* gradients by central differences.

    Independent of any analytic gradient code path; this is the oracle
    the production bracket is validated against.
    """
    n = max(f.level, g.level)
    if n > T.depth:
        raise IndexError(f"bracket level {n} exceeds tower depth {T.depth}")
    X = T.level(n)
    if h is None:
        h = 1e-5 * (1.0 + float(np.linalg.norm(X)))
    gf = _fd_gradient_raw(f, X, n, h)
    gg = _fd_gradient_raw(g, X, n, h)
    return complex(np.trace(X @ (gf @ gg - gg @ gf)))


def charpoly_coefficients(M: np.ndarray) -> np.ndarray:
    """Monic characteristic polynomial coefficients, highest power first.

    Faddeev-LeVerrier recursion: exactish at oracle scale.
    """
    M = np.asarray(M, dtype=np.complex128)
    n = M.shape[0]
    coeffs = np.zeros(n + 1, dtype=np.complex128)
    coeffs[0] = 1.0
    Mk = np.eye(n, dtype=np.complex128)
    for k in range(1, n + 1):
        Mk = M @ Mk
        ck = -np.trace(Mk) / k
        coeffs[k] = ck
        Mk = Mk + ck * np.eye(n, dtype=np.complex128)
    return coeffs


def _durand_kerner(coeffs: np.ndarray, max_iter: int = 500, rtol: float = 1e-13) -> np.ndarray:
    """All roots of a monic polynomial by simultaneous (Weierstrass) iteration."""
    n = len(coeffs) - 1
    if n == 0:
        return np.array([], dtype=np.complex128)
    if n == 1:
        return np.array([-coeffs[1]], dtype=np.complex128)

    def p(z: np.ndarray) -> np.ndarray:
        acc = np.full_like(z, coeffs[0])
        for c in coeffs[1:]:
            acc = acc * z + c
        return acc

    radius = 1.0 + float(np.max(np.abs(coeffs[1:])))
    base = 0.4 + 0.9j
    z = radius * base ** np.arange(1, n + 1)
    for _ in range(max_iter):
        pz = p(z)
        diffs = z[:, None] - z[None, :]
        np.fill_diagonal(diffs, 1.0)
        denom = np.prod(diffs, axis=1)
        # Nudge coincident iterates apart rather than dividing by zero.
        bad = np.abs(denom) < 1e-300
        if np.any(bad):
            z = z + np.where(bad, 1e-8 * radius * (1 + 1j), 0.0)
            continue
        update = pz / denom
        z = z - update
        if np.max(np.abs(update)) <= rtol * (1.0 + np.max(np.abs(z))):
            return z
    raise ConvergenceError(f"root iteration did not converge in {max_iter} steps")


def charpoly_roots(M: np.ndarray) -> list[complex]:
    """Eigenvalue estimates via characteristic-polynomial root iteration.

    Test-scale diagnostic (dim <= 8) used to cross-check the
    Sylvester-operator spectrum test; not an eigensolver.
    """
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    if M.shape[0] > MAX_ORACLE_DIM:
        raise ValueError(f"oracle capped at dimension {MAX_ORACLE_DIM}")
    roots = _durand_kerner(charpoly_coefficients(M))
    return [complex(z) for z in roots]


def dense_kernel(matrix, tol: Tolerance = DEFAULT_TOL) -> list[np.ndarray]:
    """Kernel basis by full-pivot Gaussian elimination.

    Pivots below ``max(tol.abs, tol.rel * first_pivot)`` terminate the
    elimination; one kernel vector is produced per free column.  The
    threshold convention matches the SVD-based production kernel, the
    algorithm shares nothing with it.
    """
    A = np.array(matrix, dtype=np.complex128)
    if A.ndim != 2:
        raise ValueError("expected a 2D array")
    m, n = A.shape
    col_perm = list(range(n))
    rank = 0
    scale = None
    steps = min(m, n)
    for r in range(steps):
        sub = np.abs(A[r:, r:])
        p, q = np.unravel_index(int(np.argmax(sub)), sub.shape)
        pivot = abs(A[r + p, r + q])
        if scale is None:
            scale = pivot
        if pivot <= tol.threshold(scale):
            break
        if p:
            A[[r, r + p], :] = A[[r + p, r], :]
        if q:
            A[:, [r, r + q]] = A[:, [r + q, r]]
            col_perm[r], col_perm[r + q] = col_perm[r + q], col_perm[r]
        A[r + 1 :, r:] -= np.outer(A[r + 1 :, r] / A[r, r], A[r, r:])
        A[r + 1 :, r] = 0.0
        rank += 1

    basis: list[np.ndarray] = []
    for free in range(rank, n):
        x = np.zeros(n, dtype=np.complex128)
        x[free] = 1.0
        for row in range(rank - 1, -1, -1):
            x[row] = -np.dot(A[row, row + 1 :], x[row + 1 :]) / A[row, row]
        v = np.zeros(n, dtype=np.complex128)
        for pos, orig in enumerate(col_perm):
            v[orig] = x[pos]
        basis.append(v)
    return basis


@dataclass(frozen=True)
class OracleResult:
    """Value of an oracle run plus which registered procedure produced it."""

    value: object
    method: str
    cost: int

    def __post_init__(self) -> None:
        if self.method not in ORACLE_METHODS:
            raise ValueError(f"unknown oracle method: {self.method}")


def _cost_bracket(f: SmoothFn, g: SmoothFn, T: Tower, h=None) -> int:
    n = max(f.level, g.level)
    return 4 * (f.level**2 + g.level**2) * n + 3 * n**3


def _cost_roots(M) -> int:
    n = np.asarray(M).shape[0]
    return 500 * n * n


def _cost_kernel(matrix, tol=None) -> int:
    a = np.asarray(matrix)
    return int(a.shape[0] * a.shape[1] * min(a.shape))


ORACLE_METHODS: dict[str, tuple[Callable, Callable]] = {
    "fd-poisson-bracket": (fd_poisson_bracket, _cost_bracket),
    "charpoly-roots": (charpoly_roots, _cost_roots),
    "dense-kernel": (dense_kernel, _cost_kernel),
}


def run_oracle(method: str, *args, **kwargs) -> OracleResult:
    """Dispatch a registered oracle and wrap its value with provenance."""
    if method not in ORACLE_METHODS:
        raise ValueError(f"unknown oracle method: {method}")
    fn, cost_fn = ORACLE_METHODS[method]
    return OracleResult(value=fn(*args, **kwargs), method=method, cost=cost_fn(*args, **kwargs))
