r"""Energy-constrained minimization of the average cost.

Minimizing :math:`\bar C = \langle 2 - E_+ - E_- \rangle` at fixed mean photon
number and fixed norm, with each eigenspace of ``D`` occupied at a single
radial level ``n(d)``, leads to the eigenproblem of the tridiagonal matrix

.. math::
    A_{dd} = 2 + \mu' (2 n(d) + |d|), \qquad A_{d, d\pm1} = -1,

where :math:`\mu' > 0` is minus the energy multiplier and the eigenvalue
:math:`\lambda` is the normalization multiplier.  The ground eigenvector is
the optimal phase vector; higher eigenvectors (``branch > 0``) are the other
stationary points.  For every eigenpair :math:`\bar C = \lambda - \mu' N`.

With ``n(d) = 0`` on the infinite lattice the stationarity condition is the
Bessel recurrence, solved by :math:`\psi_d \propto J_{\lambda'+|d|}(2/\mu')`
with :math:`\lambda' = (2-\lambda)/\mu'` fixed by
:math:`J_{\lambda'+1}(2/\mu') = J_{\lambda'-1}(2/\mu')`.
:func:`closed_form_check` compares that closed form with the eigensolver.

Sweeping :math:`\mu'` traces :math:`\bar C(N)`, which approaches
:math:`\gamma/N^2`; :func:`fit_power_law` extracts :math:`\gamma`.
:func:`single_mode_baseline` repeats the pipeline for one mode, where the
phase generator has the half-line spectrum ``0, 1, 2, ...``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .bessel import bessel_j, bessel_j_orders
from .errors import ConvergenceError, DomainError, InsufficientPointsError
from .povm import LevelMap, PhaseVector
from .tridiagonal import SymTridiagonal, eigen_lowest

__all__ = [
    "OptimizationResult",
    "StationarityReport",
    "ScalingFit",
    "BesselCheck",
    "SweepOutcome",
    "build_matrix",
    "build_half_line_matrix",
    "solve",
    "solve_branches",
    "stationarity_check",
    "level_bracket",
    "boundary_mismatch",
    "boundary_root",
    "bessel_solution",
    "recursion_residuals",
    "closed_form_check",
    "sweep",
    "log_grid",
    "fit_power_law",
    "scaling_study",
    "single_mode_baseline",
    "compare_levels",
    "airy_prefactor",
    "TAIL_TOL",
    "MAX_D",
]

#: relative size of the boundary entries at which truncation is accepted
TAIL_TOL = 1e-12
#: cap on the adaptive truncation
MAX_D = 1 << 18


@dataclass(frozen=True)
class OptimizationResult:
    mu_prime: float
    lam: float
    vector: PhaseVector
    energy: float
    average_cost: float
    eigen_residual: float
    branch_index: int = 0
    d_max: int = 0
    half_line: bool = False
    levels: LevelMap = field(default_factory=LevelMap)

    @property
    def lambda_prime(self) -> float:
        return (2.0 - self.lam) / self.mu_prime

    @property
    def bookkeeping_residual(self) -> float:
        """``|C - (lam - mu' N)|``."""
        return abs(self.average_cost - (self.lam - self.mu_prime * self.energy))

    def as_row(self) -> dict:
        return {
            "mu_prime": self.mu_prime,
            "branch": self.branch_index,
            "lambda": self.lam,
            "energy": self.energy,
            "cost": self.average_cost,
        }


class StationarityReport(NamedTuple):
    d: np.ndarray
    residuals: np.ndarray
    nu: dict

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.residuals)))


class ScalingFit(NamedTuple):
    gamma: float
    slope: float
    residual_rms: float
    fit_range: tuple[float, float]
    n_points: int

    @property
    def delta_psi_prefactor(self) -> float:
        """Prefactor of ``delta_psi = sqrt(C)`` when the slope is -2."""
        return math.sqrt(self.gamma)

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "slope": self.slope,
            "residual_rms": self.residual_rms,
            "fit_range": list(self.fit_range),
            "n_points": self.n_points,
        }


class BesselCheck(NamedTuple):
    mu_prime: float
    lambda_prime: float
    recursion_residual: float
    max_deviation: float
    eigen_lambda_prime: float


@dataclass
class SweepOutcome:
    results: list[OptimizationResult]
    failures: list[tuple[float, int, str]]

    def branch(self, k: int) -> list[OptimizationResult]:
        return [r for r in self.results if r.branch_index == k]

    def points(self, k: int = 0) -> list[tuple[float, float]]:
        return [(r.energy, r.average_cost) for r in self.branch(k)]


# -- matrices ---------------------------------------------------------------


def _check_mu(mu_prime: float) -> float:
    mu_prime = float(mu_prime)
    if not math.isfinite(mu_prime) or mu_prime <= 0:
        raise DomainError(f"mu_prime must be positive and finite, got {mu_prime}")
    return mu_prime


def build_matrix(mu_prime: float, d_max: int, levels: LevelMap | None = None) -> SymTridiagonal:
    """Matrix ``A`` over ``d = -d_max .. d_max``."""
    mu_prime = _check_mu(mu_prime)
    if d_max < 0:
        raise ValueError("d_max must be non-negative")
    levels = levels or LevelMap()
    d = np.arange(-d_max, d_max + 1)
    return SymTridiagonal(2.0 + mu_prime * levels.energies(d), -np.ones(2 * d_max))


def build_half_line_matrix(mu_prime: float, n_max: int) -> SymTridiagonal:
    """Single-mode analogue over photon numbers ``n = 0 .. n_max``."""
    mu_prime = _check_mu(mu_prime)
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    return SymTridiagonal(2.0 + mu_prime * np.arange(n_max + 1), -np.ones(n_max))


# -- solves -----------------------------------------------------------------


def _initial_size(mu_prime: float, count: int) -> int:
    # ground width grows like mu'^(-1/3); excited branches reach further out
    return max(16, int(math.ceil(8.0 * count ** (2.0 / 3.0) * mu_prime ** (-1.0 / 3.0))))


def _tail_ok(vec: np.ndarray, half_line: bool) -> bool:
    peak = np.max(np.abs(vec))
    ends = abs(vec[-1]) if half_line else max(abs(vec[0]), abs(vec[-1]))
    return ends < TAIL_TOL * peak


def _result(matrix, lam, vec, mu_prime, k, size, half_line, levels):
    d_min = 0 if half_line else -size
    pv = PhaseVector(d_min, vec)
    energy = pv.energy(levels)
    cost = 2.0 - 2.0 * float(np.dot(vec[:-1], vec[1:]))
    resid = float(np.linalg.norm(matrix.matvec(vec) - lam * vec))
    return OptimizationResult(
        mu_prime=mu_prime,
        lam=float(lam),
        vector=pv,
        energy=energy,
        average_cost=cost,
        eigen_residual=resid,
        branch_index=k,
        d_max=size,
        half_line=half_line,
        levels=levels,
    )


def _parity_project(matrix: SymTridiagonal, vec: np.ndarray) -> tuple[float, np.ndarray]:
    # mirror-symmetric A: eigenvectors can be chosen even or odd, and near-degenerate
    # pairs (double wells from raised n(d)) come out of inverse iteration mixed
    even = 0.5 * (vec + vec[::-1])
    odd = 0.5 * (vec - vec[::-1])
    part = even if np.linalg.norm(even) >= np.linalg.norm(odd) else odd
    part = part / np.linalg.norm(part)
    return float(np.dot(part, matrix.matvec(part))), part


def solve_branches(
    mu_prime: float,
    count: int = 1,
    levels: LevelMap | None = None,
    d_max: int | None = None,
    half_line: bool = False,
    max_d: int = MAX_D,
) -> list[OptimizationResult]:
    """Lowest ``count`` stationary points at one value of ``mu_prime``.

    The truncation starts at ``max(16, ceil(8 count^(2/3) mu'^(-1/3)))`` and
    doubles until every returned vector has boundary entries below
    ``TAIL_TOL`` times its peak.  Passing ``d_max`` pins the truncation.

    Raises
    ------
    DomainError
        ``mu_prime <= 0`` or levels given on the half line.
    ConvergenceError
        Truncation would exceed ``max_d``.
    """
    mu_prime = _check_mu(mu_prime)
    levels = levels or LevelMap()
    if half_line and not levels.is_default():
        raise DomainError("level maps apply to the two-mode problem only")
    if count < 1:
        raise ValueError("count must be positive")
    size = d_max if d_max is not None else _initial_size(mu_prime, count)
    while True:
        if size > max_d:
            raise ConvergenceError(
                f"truncation {size} exceeds cap {max_d} at mu_prime={mu_prime:g}"
            )
        if half_line:
            matrix = build_half_line_matrix(mu_prime, size)
        else:
            matrix = build_matrix(mu_prime, size, levels)
        if count > matrix.dim:
            raise ValueError(f"{count} branches requested from a {matrix.dim}-dim problem")
        pairs = eigen_lowest(matrix, count)
        if not half_line and levels.is_symmetric():
            pairs = [_parity_project(matrix, v) for _, v in pairs]
        if d_max is not None or all(_tail_ok(v, half_line) for _, v in pairs):
            break
        size *= 2
    return [
        _result(matrix, lam, vec, mu_prime, k, size, half_line, levels)
        for k, (lam, vec) in enumerate(pairs)
    ]


def solve(
    mu_prime: float,
    levels: LevelMap | None = None,
    branch: int = 0,
    d_max: int | None = None,
    half_line: bool = False,
) -> OptimizationResult:
    """Stationary point ``branch`` (0 = optimum) at energy multiplier ``mu_prime``.

    Examples
    --------
    >>> r = solve(1.0, d_max=1)
    >>> round(r.lam, 12), round(r.energy, 12), round(r.average_cost, 12)
    (1.0, 0.333333333333, 0.666666666667)
    """
    if branch < 0:
        raise ValueError("branch must be non-negative")
    return solve_branches(mu_prime, branch + 1, levels, d_max, half_line)[branch]


def stationarity_check(result: OptimizationResult) -> StationarityReport:
    r"""Residuals of the reduced stationarity condition and the multipliers ``nu(d)``.

    Per ``d``: :math:`(2-\lambda)\psi_d - \psi_{d-1} - \psi_{d+1}
    + \mu'(2n(d)+|d|)\psi_d` and :math:`\nu^{(d)} = -\psi_d(\psi_{d+1}+\psi_{d-1})`.
    """
    pv = result.vector
    psi = pv.amps
    padded = np.concatenate([[0.0], psi, [0.0]])
    neighbours = padded[:-2] + padded[2:]
    energies = result.levels.energies(pv.d)
    resid = (2.0 - result.lam) * psi - neighbours + result.mu_prime * energies * psi
    nu = {int(d): float(-p * s) for d, p, s in zip(pv.d, psi, neighbours)}
    return StationarityReport(pv.d, resid, nu)


def level_bracket(result: OptimizationResult, d: int, n: int) -> float:
    r"""Coefficient multiplying :math:`c_{n,d}` in the per-level stationarity condition.

    Vanishes at ``n = n(d)`` and equals :math:`2\mu'(n - n(d))\psi_d^2`
    elsewhere, so a stationary point with :math:`\psi_d \ne 0` can occupy
    only one radial level per eigenspace.
    """
    pv = result.vector
    psi_d = pv.amp(d)
    s = pv.amp(d - 1) + pv.amp(d + 1)
    nu = -psi_d * s
    energy = 2 * n + abs(d)
    return (2.0 - result.lam) * psi_d**2 - 2.0 * psi_d * s + result.mu_prime * psi_d**2 * energy - nu


# -- Bessel closed form -------------------------------------------------------


def boundary_mismatch(lambda_prime: float, mu_prime: float) -> float:
    r""":math:`J_{\lambda'+1}(2/\mu') - J_{\lambda'-1}(2/\mu')`."""
    x = 2.0 / _check_mu(mu_prime)
    return bessel_j(lambda_prime + 1.0, x) - bessel_j(lambda_prime - 1.0, x)


def boundary_root(mu_prime: float, step: float = 0.05, tol: float = 1e-13) -> float:
    r"""Largest root :math:`\lambda' \in (1, 2/\mu')` of :func:`boundary_mismatch`.

    Scans down from :math:`2/\mu'` for the first sign change, then bisects.
    The largest root corresponds to the ground state.

    Raises
    ------
    DomainError
        No sign change in the scanned interval.
    """
    x = 2.0 / _check_mu(mu_prime)
    hi = x
    f_hi = boundary_mismatch(hi, mu_prime)
    lo = hi
    while True:
        lo = hi - step
        if lo < 1.0:
            raise DomainError(f"no boundary root above 1 for mu_prime={mu_prime:g}")
        f_lo = boundary_mismatch(lo, mu_prime)
        if f_lo == 0.0:
            return lo
        if np.sign(f_lo) != np.sign(f_hi):
            break
        hi, f_hi = lo, f_lo
    for _ in range(200):
        if hi - lo <= tol * max(1.0, abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        f_mid = boundary_mismatch(mid, mu_prime)
        if np.sign(f_mid) == np.sign(f_hi):
            hi, f_hi = mid, f_mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def bessel_solution(mu_prime: float, lambda_prime: float, threshold: float = 1e-16) -> PhaseVector:
    r"""Normalized :math:`\psi_d \propto J_{\lambda'+|d|}(2/\mu')`.

    The vector is cut where the Bessel values drop below ``threshold`` times
    their maximum.
    """
    x = 2.0 / _check_mu(mu_prime)
    if lambda_prime < 0:
        raise DomainError("lambda_prime must be non-negative")
    count = int(math.ceil(x + 40.0 + 15.0 * x ** (1.0 / 3.0)))
    vals = bessel_j_orders(lambda_prime, count, x)
    peak = np.max(np.abs(vals))
    if not peak > 0:
        raise DomainError("closed form is not normalizable: all terms vanish")
    keep = np.flatnonzero(np.abs(vals) >= threshold * peak)
    top = int(keep[-1])
    half = vals[: top + 1]
    amps = np.concatenate([half[:0:-1], half])
    return PhaseVector(-top, amps / np.linalg.norm(amps))


def recursion_residuals(pv: PhaseVector, mu_prime: float, lambda_prime: float) -> np.ndarray:
    r"""Per-``d`` residual of :math:`\psi_{d-1}+\psi_{d+1} = \mu'(\lambda'+|d|)\psi_d`.

    Entries at the two ends of the vector involve the truncated neighbour.
    """
    psi = pv.amps
    padded = np.concatenate([[0.0], psi, [0.0]])
    return padded[:-2] + padded[2:] - mu_prime * (lambda_prime + np.abs(pv.d)) * psi


def closed_form_check(mu_prime: float, d_max: int | None = None) -> BesselCheck:
    """Compare the Bessel closed form against the eigensolver ground vector.

    ``lambda_prime`` comes from :func:`boundary_root`, independently of the
    eigensolve.  The recursion residual is taken over interior ``d``.
    """
    lp = boundary_root(mu_prime)
    closed = bessel_solution(mu_prime, lp)
    rec = recursion_residuals(closed, mu_prime, lp)[1:-1]
    ground = solve(mu_prime, d_max=d_max)
    lo = min(closed.d_min, ground.vector.d_min)
    hi = max(closed.d_max, ground.vector.d_max)
    a = np.zeros(hi - lo + 1)
    b = np.zeros(hi - lo + 1)
    a[closed.d_min - lo: closed.d_max - lo + 1] = closed.amps
    b[ground.vector.d_min - lo: ground.vector.d_max - lo + 1] = ground.vector.amps
    return BesselCheck(
        mu_prime=float(mu_prime),
        lambda_prime=lp,
        recursion_residual=float(np.max(np.abs(rec))) if rec.size else 0.0,
        max_deviation=float(np.max(np.abs(a - b))),
        eigen_lambda_prime=ground.lambda_prime,
    )


# -- sweeps and fits ----------------------------------------------------------


def log_grid(lo: float, hi: float, steps: int) -> np.ndarray:
    return np.logspace(np.log10(lo), np.log10(hi), steps)


def _sweep_point(args):
    mu, count, levels, d_max, half_line = args
    try:
        return solve_branches(mu, count, levels, d_max, half_line), None
    except (ConvergenceError, DomainError, ValueError) as exc:
        return None, str(exc)


def sweep(
    mu_grid: Iterable[float],
    levels: LevelMap | None = None,
    branches: int = 1,
    d_max: int | None = None,
    half_line: bool = False,
    workers: int = 1,
) -> SweepOutcome:
    """Solve branches ``0 .. branches-1`` at every grid value.

    Failed grid points are recorded in ``failures`` and the sweep continues.
    Results are sorted by energy, ties by ``(branch, mu_prime)``; the order
    does not depend on ``workers``.
    """
    grid = [float(m) for m in mu_grid]
    if not grid:
        raise ValueError("mu grid is empty")
    for m in grid:
        _check_mu(m)
    if branches < 1:
        raise ValueError("branches must be positive")
    jobs = [(m, branches, levels, d_max, half_line) for m in grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_sweep_point, jobs))
    else:
        outputs = [_sweep_point(job) for job in jobs]
    results, failures = [], []
    for m, (res, err) in zip(grid, outputs):
        if err is not None:
            failures.extend((m, k, err) for k in range(branches))
        else:
            results.extend(res)
    results.sort(key=lambda r: (r.energy, r.branch_index, r.mu_prime))
    return SweepOutcome(results, failures)


def fit_power_law(
    points: Sequence[tuple[float, float]],
    fit_range: tuple[float, float] = (10.0, 1000.0),
    fix_slope: float | None = None,
) -> ScalingFit:
    """Least-squares fit of ``log C = log gamma + slope log N``.

    Only points with ``fit_range[0] <= N <= fit_range[1]`` enter.  With
    ``fix_slope`` the slope is held and ``gamma = exp(mean(log C - slope log N))``.

    Raises
    ------
    InsufficientPointsError
        Fewer than three positive points in range.
    """
    lo, hi = fit_range
    if not lo < hi:
        raise ValueError("fit range must be increasing")
    pts = np.array([(n, c) for n, c in points if lo <= n <= hi], dtype=float).reshape(-1, 2)
    if pts.shape[0] < 3:
        raise InsufficientPointsError(
            f"{pts.shape[0]} points with N in [{lo:g}, {hi:g}]; at least 3 needed"
        )
    if np.any(pts <= 0):
        raise ValueError("power-law fit needs positive N and C")
    x, y = np.log(pts[:, 0]), np.log(pts[:, 1])
    if fix_slope is None:
        slope, intercept = np.polyfit(x, y, 1)
    else:
        slope = float(fix_slope)
        intercept = float(np.mean(y - slope * x))
    resid = y - (intercept + slope * x)
    return ScalingFit(
        gamma=float(np.exp(intercept)),
        slope=float(slope),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        fit_range=(float(lo), float(hi)),
        n_points=int(pts.shape[0]),
    )


def scaling_study(
    mu_grid: Iterable[float],
    fit_range: tuple[float, float] = (10.0, 1000.0),
    fix_slope: float = -2.0,
    half_line: bool = False,
    workers: int = 1,
) -> tuple[SweepOutcome, ScalingFit, ScalingFit]:
    """Ground-branch sweep with fixed-slope and free-slope fits."""
    outcome = sweep(mu_grid, half_line=half_line, workers=workers)
    pts = outcome.points(0)
    return (
        outcome,
        fit_power_law(pts, fit_range, fix_slope=fix_slope),
        fit_power_law(pts, fit_range, fix_slope=None),
    )


def single_mode_baseline(
    mu_grid: Iterable[float],
    fit_range: tuple[float, float] = (10.0, 1000.0),
    fix_slope: float | None = -2.0,
    workers: int = 1,
) -> ScalingFit:
    """Power-law fit of the optimal single-mode cost versus mean photon number."""
    outcome = sweep(mu_grid, half_line=True, workers=workers)
    return fit_power_law(outcome.points(0), fit_range, fix_slope=fix_slope)


def compare_levels(
    mu_grid: Iterable[float], candidates: dict[str, LevelMap]
) -> dict[str, SweepOutcome]:
    """Ground-branch sweeps for several level maps ``n(d)``."""
    grid = list(mu_grid)
    return {name: sweep(grid, levels=lm) for name, lm in candidates.items()}


def airy_prefactor(half_line: bool = False) -> float:
    r"""Small-:math:`\mu'` limit of :math:`\bar C N^2` for the ground branch.

    In the continuum limit the ground state solves an Airy problem with a
    linear potential; the virial theorem gives :math:`\bar C N^2 \to 4 E^3/27`
    with :math:`E = |a_1'|` (two modes, symmetric well) or :math:`E = |a_1|`
    (one mode, hard wall at ``n = 0``).
    """
    from scipy.special import ai_zeros

    a, ap, _, _ = ai_zeros(1)
    e = abs(a[0]) if half_line else abs(ap[0])
    return 4.0 * e**3 / 27.0
