"""Lowest eigenpairs of real symmetric tridiagonal matrices.

Eigenvalues come from bisection on Sturm sequence counts, eigenvectors from
inverse iteration with the converged eigenvalue as shift, finished with a
Rayleigh quotient.  Only the requested lowest ``k`` pairs are computed, so
the cost is ``O(k * dim * iterations)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from .errors import ConvergenceError

__all__ = ["SymTridiagonal", "sturm_count", "kth_eigenvalue", "eigen_lowest"]

_EPS = np.finfo(float).eps
_MAX_BISECT = 200
_MAX_INVERSE = 8


@dataclass(frozen=True)
class SymTridiagonal:
    """Symmetric tridiagonal matrix stored as its diagonal and off-diagonal."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        diag = np.array(self.diag, dtype=float)
        off = np.array(self.offdiag, dtype=float)
        if diag.ndim != 1 or diag.size < 1:
            raise ValueError("diag must be a non-empty 1-D array")
        if off.shape != (diag.size - 1,):
            raise ValueError(f"offdiag must have length {diag.size - 1}, got {off.shape}")
        diag.setflags(write=False)
        off.setflags(write=False)
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "offdiag", off)

    @property
    def dim(self) -> int:
        return self.diag.size

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diag * x
        y[:-1] += self.offdiag * x[1:]
        y[1:] += self.offdiag * x[:-1]
        return y

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def gershgorin(self) -> tuple[float, float]:
        rad = np.zeros(self.dim)
        rad[:-1] += np.abs(self.offdiag)
        rad[1:] += np.abs(self.offdiag)
        return float(np.min(self.diag - rad)), float(np.max(self.diag + rad))


def sturm_count(matrix: SymTridiagonal, x: float) -> int:
    """Number of eigenvalues strictly below ``x``.

    Counts negative pivots of the LDL^T factorization of ``matrix - x I``.
    """
    d = matrix.diag.tolist()
    e2 = (matrix.offdiag**2).tolist()
    tiny = _EPS * _EPS
    count = 0
    q = d[0] - x
    if q < 0:
        count += 1
    for i in range(1, len(d)):
        if q == 0.0:
            q = tiny
        q = (d[i] - x) - e2[i - 1] / q
        if q < 0:
            count += 1
    return count


def kth_eigenvalue(matrix: SymTridiagonal, k: int, lo: float | None = None,
                   hi: float | None = None) -> float:
    """Eigenvalue ``k`` (0-based, ascending) by bisection to machine tolerance."""
    g_lo, g_hi = matrix.gershgorin()
    lo = g_lo if lo is None else lo
    hi = g_hi if hi is None else hi
    scale = max(abs(g_lo), abs(g_hi), 1.0)
    tol = 2.0 * _EPS * scale
    for _ in range(_MAX_BISECT):
        if hi - lo <= tol:
            return 0.5 * (lo + hi)
        mid = 0.5 * (lo + hi)
        if sturm_count(matrix, mid) > k:
            hi = mid
        else:
            lo = mid
    raise ConvergenceError(f"bisection for eigenvalue {k} did not converge")


def _inverse_iteration(matrix: SymTridiagonal, shift: float, start: np.ndarray,
                       previous: list[np.ndarray]) -> tuple[float, np.ndarray, float]:
    n = matrix.dim
    scale = max(np.max(np.abs(matrix.diag)), 1.0)
    if n == 1:
        return float(matrix.diag[0]), np.ones(1), 0.0
    ab = np.zeros((3, n))
    ab[0, 1:] = matrix.offdiag
    ab[2, :-1] = matrix.offdiag
    x = start / np.linalg.norm(start)
    lam, resid = shift, np.inf
    nudge = _EPS * scale
    for _ in range(_MAX_INVERSE):
        # nudge off an exactly singular shift, harder if LAPACK still hits a zero pivot
        for _attempt in range(4):
            ab[1] = matrix.diag - shift + nudge
            try:
                y = solve_banded((1, 1), ab, x, check_finite=False)
                break
            except LinAlgError:
                nudge *= 1e3
        else:
            raise ConvergenceError(f"shifted matrix singular near {shift!r}")
        for p in previous:
            y -= np.dot(p, y) * p
        x = y / np.linalg.norm(y)
        ax = matrix.matvec(x)
        lam = float(np.dot(x, ax))
        resid = float(np.linalg.norm(ax - lam * x))
        if resid <= 1e-13 * (1.0 + abs(lam)):
            break
    return lam, x, resid


def _fix_sign(v: np.ndarray) -> np.ndarray:
    big = np.flatnonzero(np.abs(v) >= 1e-3 * np.max(np.abs(v)))[0]
    return v if v[big] > 0 else -v


def eigen_lowest(matrix: SymTridiagonal, k: int = 1) -> list[tuple[float, np.ndarray]]:
    """The ``k`` lowest eigenpairs in ascending order.

    Each pair satisfies ``||A v - lam v|| <= 1e-10 (1 + |lam|)``.  The ground
    vector of a matrix with non-positive off-diagonal is returned with
    non-negative entries; other vectors have their first significant entry
    positive.

    Raises
    ------
    ConvergenceError
        If bisection or inverse iteration fails to meet tolerance.
    """
    if not 1 <= k <= matrix.dim:
        raise ValueError(f"k must lie in [1, {matrix.dim}], got {k}")
    rng = np.random.default_rng(20240601)
    # irreducible with negative couplings: the ground vector is a Perron vector
    perron = bool(np.all(matrix.offdiag < 0))
    pairs: list[tuple[float, np.ndarray]] = []
    previous: list[np.ndarray] = []
    lo = None
    for j in range(k):
        lam0 = kth_eigenvalue(matrix, j, lo=lo)
        lo = lam0 - 4.0 * _EPS * max(abs(lam0), 1.0)
        start = 1.0 + 0.5 * rng.standard_normal(matrix.dim)
        lam, vec, resid = _inverse_iteration(matrix, lam0, start, previous)
        if resid > 1e-10 * (1.0 + abs(lam)):
            raise ConvergenceError(
                f"inverse iteration for eigenvalue {j} stalled at residual {resid:.3e}"
            )
        vec = np.abs(vec) if j == 0 and perron else _fix_sign(vec)
        previous.append(vec)
        pairs.append((lam, vec))
    return pairs
