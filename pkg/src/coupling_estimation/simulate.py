"""Monte Carlo draws from the adapted POVM and circular estimator statistics.

Samples are drawn by inverse-CDF on a uniform grid over ``[0, 2 pi)``: the
cumulative distribution is tabulated at the grid nodes from its closed form
and interpolated linearly inside each cell.  For smooth densities the
resulting error is ``O(grid_size**-2)``.

Randomness comes from numpy's ``PCG64`` seeded through ``SeedSequence(seed)``
and spawned into one child stream per shard of ``SHARD_SIZE`` draws, so the
samples depend only on ``(seed, count)`` and not on how shards are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridTooCoarseError
from .povm import PhaseVector, conditional_cdf, conditional_density, cost_function

__all__ = [
    "SampleRun",
    "EstimatorStats",
    "sample",
    "estimator_stats",
    "peak_check",
    "DEFAULT_SAMPLE_GRID",
    "SHARD_SIZE",
]

DEFAULT_SAMPLE_GRID = 1 << 14
SHARD_SIZE = 1 << 16
_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class SampleRun:
    theta_true: float
    samples: np.ndarray
    seed: int
    grid_size: int

    @property
    def count(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class EstimatorStats:
    circular_mean: float
    mean_cost: float
    cost_stderr: float
    delta_psi_hat: float
    circular_stderr: float
    resultant_length: float
    circular_mean_defined: bool = True

    def to_dict(self) -> dict:
        return {
            "circular_mean": self.circular_mean if self.circular_mean_defined else None,
            "mean_cost": self.mean_cost,
            "cost_stderr": self.cost_stderr,
            "delta_psi_hat": self.delta_psi_hat,
            "circular_stderr": self.circular_stderr,
            "resultant_length": self.resultant_length,
            "circular_mean_defined": self.circular_mean_defined,
        }


def _uniforms(seed: int, count: int) -> np.ndarray:
    n_shards = -(-count // SHARD_SIZE)
    children = np.random.SeedSequence(seed).spawn(n_shards)
    parts = []
    for i, child in enumerate(children):
        size = min(SHARD_SIZE, count - i * SHARD_SIZE)
        parts.append(np.random.Generator(np.random.PCG64(child)).random(size))
    return np.concatenate(parts)


def sample(
    pv: PhaseVector,
    theta: float,
    count: int,
    seed: int = 0,
    grid_size: int = DEFAULT_SAMPLE_GRID,
) -> SampleRun:
    """Draw ``count`` outcomes from ``p(phi | theta)``.

    Raises
    ------
    GridTooCoarseError
        If the density changes by more than 10 % of its maximum across a cell.
    """
    pv.require_normalized()
    if count < 1:
        raise ValueError("count must be at least 1")
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    h = _TWO_PI / grid_size
    nodes = np.arange(grid_size + 1) * h
    dens = conditional_density(pv, nodes)
    if np.max(np.abs(np.diff(dens))) > 0.1 * np.max(dens):
        raise GridTooCoarseError(
            f"density varies by more than 10% across a cell of a {grid_size}-node grid"
        )
    cdf = conditional_cdf(pv, nodes[:-1])
    cdf = np.append(cdf, 1.0)
    cdf[0] = 0.0
    cdf = np.maximum.accumulate(cdf)
    cdf /= cdf[-1]

    u = _uniforms(seed, count)
    cell = np.clip(np.searchsorted(cdf, u, side="right") - 1, 0, grid_size - 1)
    width = cdf[cell + 1] - cdf[cell]
    frac = np.divide(u - cdf[cell], width, out=np.zeros_like(u), where=width > 0)
    x = (cell + np.clip(frac, 0.0, 1.0)) * h
    phi = np.mod(x + theta, _TWO_PI)
    phi[phi >= _TWO_PI] = 0.0
    return SampleRun(float(theta), phi, int(seed), int(grid_size))


def estimator_stats(run: SampleRun) -> EstimatorStats:
    """Circular mean, mean cost and their standard errors.

    The circular mean is undefined (``circular_mean_defined`` False, value
    NaN) when the resultant ``|sum exp(i phi)|`` is below 1e-12.
    """
    phi = run.samples
    n = phi.size
    if n == 0:
        raise ValueError("empty sample run")
    resultant = np.sum(np.exp(1j * phi))
    r_bar = abs(resultant) / n
    defined = abs(resultant) >= 1e-12
    mean = float(np.angle(resultant)) if defined else float("nan")
    costs = cost_function(phi - run.theta_true)
    mean_cost = float(np.mean(costs))
    stderr = float(np.std(costs, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    if defined and r_bar > 0:
        spread = 1.0 - float(np.mean(np.cos(2.0 * (phi - mean))))
        circ_se = float(np.sqrt(max(spread, 0.0) / (2.0 * n)) / r_bar)
    else:
        circ_se = float("inf")
    return EstimatorStats(
        circular_mean=mean,
        mean_cost=mean_cost,
        cost_stderr=stderr,
        delta_psi_hat=float(np.sqrt(mean_cost)),
        circular_stderr=circ_se,
        resultant_length=float(r_bar),
        circular_mean_defined=bool(defined),
    )


def peak_check(pv: PhaseVector, grid_size: int = 4096) -> bool:
    """Whether ``p(phi | 0)`` has a single maximum on the circle, at ``phi = 0``.

    Runs of grid values equal to within 1e-12 of the maximum density are
    merged before counting, so flat densities have no peak.
    """
    h = _TWO_PI / grid_size
    dens = conditional_density(pv, np.arange(grid_size) * h)
    top = float(np.max(dens))
    tol = 1e-12 * top
    if top - float(np.min(dens)) <= tol:
        return False
    # merge plateaus; rotate so the sequence starts at a strict change
    start = int(np.argmin(dens))
    vals = np.roll(dens, -start)
    idx = np.roll(np.arange(grid_size), -start)
    runs: list[tuple[float, list[int]]] = []
    for v, i in zip(vals, idx):
        if runs and abs(v - runs[-1][0]) <= tol:
            runs[-1][1].append(int(i))
        else:
            runs.append((float(v), [int(i)]))
    if len(runs) > 1 and abs(runs[0][0] - runs[-1][0]) <= tol:
        first = runs.pop(0)
        runs[-1][1].extend(first[1])
    m = len(runs)
    peaks = [
        members
        for j, (v, members) in enumerate(runs)
        if v > runs[j - 1][0] and v > runs[(j + 1) % m][0]
    ]
    if len(peaks) != 1:
        return False
    dist = np.minimum(np.array(peaks[0]), grid_size - np.array(peaks[0]))
    return bool(np.min(dist) <= 1)
