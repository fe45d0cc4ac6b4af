r"""State-adapted covariant phase POVM and its statistics.

For a pure state split over the eigenspaces of ``D`` as
:math:`|\psi_0\rangle\rangle = \sum_d \gamma_d |d\rangle\rangle`, the optimal
covariant measurement has outcome density

.. math::
    p(\phi|\theta) = \frac{1}{2\pi}\Big|\sum_d \gamma_d e^{i d(\phi-\theta)}\Big|^2

when the state is shifted by :math:`e^{-iD\theta}`.  Everything in this
module works on the reduced :class:`PhaseVector` of weights, except
:func:`full_picture_density`, which takes the long way through the two-mode
space and serves as a cross-check.

Conventions
-----------
* The measured parameter ``theta`` is the phase conjugate to ``D``.  In the
  lab frame the shift :math:`e^{-iD\theta}` is produced by the coupling
  evolution :math:`U_\psi = e^{-iJ_x\psi}` with :math:`\psi = 2\theta`
  (``J_z = D/2``); see :func:`coupling_shift_to_phase`.
* POVM vectors are :math:`|E_\phi\rangle\rangle = \sum_d e^{-id\phi}|d\rangle\rangle`,
  the sign for which the density depends on :math:`\phi - \theta`.
* The POVM is never built as an operator, and its completion outside the
  span of the :math:`|d\rangle\rangle` is irrelevant for the states it is
  adapted to.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import IO, Mapping, NamedTuple

import numpy as np

from .errors import NormalizationError
from .fock import BasisLabel, EigenspaceDecomposition, TwoModeState, decompose
from .schwinger import coupling_evolution, rotate_to_z

__all__ = [
    "LevelMap",
    "PhaseVector",
    "CostReport",
    "cost_function",
    "average_cost",
    "autocorrelation",
    "conditional_density",
    "conditional_cdf",
    "density_grid",
    "quadrature_normalization",
    "quadrature_average_cost",
    "reduced_phase_vector",
    "phase_vector_from_decomposition",
    "phase_vector_to_state",
    "full_picture_density",
    "coupling_to_shift",
    "coupling_shift_to_phase",
    "DEFAULT_GRID",
]

DEFAULT_GRID = 4096
_NORM_TOL = 1e-9


@dataclass(frozen=True)
class LevelMap:
    """Radial level ``n(d)`` occupied in each eigenspace; zero where unset."""

    n_of_d: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for d, n in self.n_of_d.items():
            if int(n) != n or n < 0:
                raise ValueError(f"n(d) must be a non-negative integer, got n({d}) = {n}")
            if n:
                clean[int(d)] = int(n)
        object.__setattr__(self, "n_of_d", MappingProxyType(clean))

    def __reduce__(self):
        return (LevelMap, (dict(self.n_of_d),))

    @classmethod
    def constant(cls, n: int, d_max: int) -> "LevelMap":
        return cls({d: n for d in range(-d_max, d_max + 1)})

    def n(self, d: int) -> int:
        return self.n_of_d.get(int(d), 0)

    def levels(self, d: np.ndarray) -> np.ndarray:
        return np.array([self.n(int(x)) for x in d], dtype=float)

    def energies(self, d: np.ndarray) -> np.ndarray:
        """Photon number ``2 n(d) + |d|`` of each sector."""
        d = np.asarray(d)
        return 2.0 * self.levels(d) + np.abs(d)

    def is_symmetric(self) -> bool:
        return all(self.n(-d) == n for d, n in self.n_of_d.items())

    def is_default(self) -> bool:
        return not self.n_of_d

    def to_dict(self) -> dict:
        return {"n_of_d": {str(d): n for d, n in sorted(self.n_of_d.items())}}

    @classmethod
    def from_dict(cls, doc: Mapping) -> "LevelMap":
        raw = doc.get("n_of_d", doc)
        return cls({int(d): int(n) for d, n in raw.items()})


@dataclass(frozen=True)
class PhaseVector:
    """Real amplitudes ``psi_d`` over ``d = d_min .. d_min + len(amps) - 1``.

    Weights of a state produced by :func:`reduced_phase_vector` are
    non-negative.  Eigenvectors of the optimizer above the ground branch
    carry signs; :meth:`rephased` gives their non-negative form.
    """

    d_min: int
    amps: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amps, dtype=float)
        if amps.ndim != 1 or amps.size == 0:
            raise ValueError("amps must be a non-empty 1-D array")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amps must be finite")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)
        object.__setattr__(self, "d_min", int(self.d_min))

    @property
    def d_max(self) -> int:
        return self.d_min + self.amps.size - 1

    @property
    def d(self) -> np.ndarray:
        return np.arange(self.d_min, self.d_max + 1)

    def amp(self, d: int) -> float:
        i = d - self.d_min
        return float(self.amps[i]) if 0 <= i < self.amps.size else 0.0

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def require_normalized(self, tol: float = _NORM_TOL) -> None:
        nrm = self.norm()
        if abs(nrm - 1.0) > tol:
            raise NormalizationError(f"phase vector norm {nrm!r} deviates from 1")

    def normalized(self) -> "PhaseVector":
        nrm = self.norm()
        if nrm == 0:
            raise NormalizationError("cannot normalize the zero vector")
        return PhaseVector(self.d_min, self.amps / nrm)

    def rephased(self) -> "PhaseVector":
        return PhaseVector(self.d_min, np.abs(self.amps))

    def energy(self, levels: LevelMap | None = None) -> float:
        levels = levels or LevelMap()
        return float(np.sum(levels.energies(self.d) * self.amps**2))

    def to_dict(self) -> dict:
        return {"d_min": self.d_min, "d_max": self.d_max, "amps": [float(x) for x in self.amps]}

    @classmethod
    def from_dict(cls, doc: Mapping) -> "PhaseVector":
        pv = cls(int(doc["d_min"]), np.asarray(doc["amps"], dtype=float))
        if "d_max" in doc and int(doc["d_max"]) != pv.d_max:
            raise ValueError("d_max inconsistent with d_min and len(amps)")
        return pv

    def dump(self, target: str | IO[str]) -> None:
        if hasattr(target, "write"):
            json.dump(self.to_dict(), target)
        else:
            with open(target, "w") as fh:
                json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, source: str | IO[str]) -> "PhaseVector":
        if hasattr(source, "read"):
            return cls.from_dict(json.load(source))
        with open(source) as fh:
            return cls.from_dict(json.load(fh))


class CostReport(NamedTuple):
    average_cost: float
    energy: float
    delta_psi: float


def cost_function(delta):
    """Periodic cost ``4 sin^2(delta/2)``; behaves as ``delta**2`` near zero."""
    return 4.0 * np.sin(np.asarray(delta) / 2.0) ** 2


def average_cost(pv: PhaseVector, levels: LevelMap | None = None) -> CostReport:
    """Average cost ``2 - 2 sum_d psi_d psi_{d+1}`` and mean photon number.

    Raises
    ------
    NormalizationError
        If ``pv`` is not normalized to within 1e-9.
    """
    pv.require_normalized()
    a = pv.amps
    cost = 2.0 - 2.0 * float(np.dot(a[:-1], a[1:]))
    cost = min(max(cost, 0.0), 4.0)
    return CostReport(cost, pv.energy(levels), float(np.sqrt(cost)))


def autocorrelation(pv: PhaseVector) -> np.ndarray:
    """``R[m] = sum_d psi_d psi_{d+m}`` for ``m = 0 .. len-1``."""
    a = pv.amps
    return np.correlate(a, a, mode="full")[a.size - 1:]


def _fourier_amplitude(amps: np.ndarray, x: np.ndarray, chunk: int = 2048) -> np.ndarray:
    j = np.arange(amps.size)
    out = np.empty(x.shape, dtype=complex)
    flat_x, flat_out = x.ravel(), out.reshape(-1)
    for start in range(0, flat_x.size, chunk):
        xs = flat_x[start:start + chunk]
        flat_out[start:start + chunk] = np.exp(1j * np.outer(xs, j)) @ amps
    return out


def conditional_density(pv: PhaseVector, phi, theta: float = 0.0):
    r"""Outcome density :math:`p(\phi|\theta)` of the adapted POVM.

    Depends on ``phi`` and ``theta`` only through ``phi - theta``.
    ``phi`` may be an array.
    """
    x = np.asarray(phi, dtype=float) - theta
    amp = _fourier_amplitude(pv.amps.astype(complex), np.atleast_1d(x))
    dens = np.abs(amp) ** 2 / (2.0 * np.pi)
    return dens.reshape(x.shape) if x.ndim else float(dens[0])


def conditional_cdf(pv: PhaseVector, phi, theta: float = 0.0):
    r"""Cumulative distribution of ``(phi - theta) mod 2 pi`` on ``[0, 2 pi)``.

    Closed form from the cosine series of the density,
    :math:`F(x) = (R_0 x + 2\sum_{m\ge1} R_m \sin(mx)/m)/2\pi`.
    """
    x = np.mod(np.asarray(phi, dtype=float) - theta, 2.0 * np.pi)
    r = autocorrelation(pv)
    m = np.arange(1, r.size)
    xs = np.atleast_1d(x)
    series = np.zeros_like(xs)
    for start in range(0, xs.size, 2048):
        blk = xs[start:start + 2048]
        series[start:start + 2048] = np.sin(np.outer(blk, m)) @ (r[1:] / m)
    cdf = (r[0] * xs + 2.0 * series) / (2.0 * np.pi)
    return cdf.reshape(x.shape) if x.ndim else float(cdf[0])


def density_grid(
    pv: PhaseVector, size: int = DEFAULT_GRID, theta: float = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """Density sampled at the midpoints of a uniform ``size``-cell grid on ``[0, 2 pi)``."""
    phi = (np.arange(size) + 0.5) * (2.0 * np.pi / size)
    return phi, conditional_density(pv, phi, theta)


def quadrature_normalization(pv: PhaseVector, size: int = DEFAULT_GRID) -> float:
    """Midpoint-rule integral of the density over one period."""
    _, dens = density_grid(pv, size)
    return float(dens.sum() * 2.0 * np.pi / size)


def quadrature_average_cost(pv: PhaseVector, size: int = DEFAULT_GRID) -> float:
    r"""Average cost as a quadrature over outcomes and true values.

    :math:`\int\!\!\int C(\phi-\theta) p(\phi|\theta)\,d\phi\,d\theta/2\pi` on a
    product midpoint grid.  With both grids equal, the double sum collapses
    exactly onto a single sum over the grid differences.
    """
    h = 2.0 * np.pi / size
    x = np.arange(size) * h
    dens = conditional_density(pv, x)
    return float(np.sum(cost_function(x) * dens) * h)


def phase_vector_from_decomposition(dec: EigenspaceDecomposition) -> PhaseVector:
    """Weights ``gamma_d`` laid out over the occupied ``d`` range."""
    sectors = dec.sectors
    if not sectors:
        raise NormalizationError("empty decomposition")
    lo, hi = sectors[0], sectors[-1]
    amps = np.zeros(hi - lo + 1)
    for d in sectors:
        amps[d - lo] = dec.weights[d]
    return PhaseVector(lo, amps)


def reduced_phase_vector(state: TwoModeState) -> PhaseVector:
    """Phase vector of a lab-frame state: rotate by ``U`` then decompose."""
    return phase_vector_from_decomposition(decompose(rotate_to_z(state)))


def phase_vector_to_state(pv: PhaseVector, levels: LevelMap | None = None) -> TwoModeState:
    """Embed ``pv`` as ``sum_d psi_d |n(d), d>>`` (rotated-frame state)."""
    levels = levels or LevelMap()
    amps = {BasisLabel(levels.n(d), int(d)): a for d, a in zip(pv.d, pv.amps) if a != 0}
    n_max = max((lab.n for lab in amps), default=0)
    d_max = max(abs(pv.d_min), abs(pv.d_max))
    return TwoModeState(amps, n_max, d_max)


def full_picture_density(state: TwoModeState, psi: float, phi):
    r"""Outcome density computed through the full two-mode space.

    Parameters
    ----------
    state : TwoModeState
        Lab-frame input :math:`\rho_0`.
    psi : float
        Phase conjugate to ``D`` (see module notes); the lab evolution applied
        is :math:`U_{2\psi}`.
    phi : float or array
        Outcome(s).

    Steps: build the :math:`|d\rangle\rangle` from the rotated input
    :math:`\mathcal U|\psi_0\rangle\rangle`, evolve the input in the lab frame,
    rotate it, and project onto :math:`|E_\phi\rangle\rangle`.  Agrees with
    ``conditional_density(reduced_phase_vector(state), phi, psi)``.
    """
    dec = decompose(rotate_to_z(state))
    evolved = rotate_to_z(coupling_evolution(state, 2.0 * psi))
    sectors = np.array(dec.sectors)
    overlaps = np.empty(sectors.size, dtype=complex)
    for i, d in enumerate(sectors):
        vec = dec.eigenvector(int(d))
        chi = np.array([evolved.amplitude(n, int(d)) for n in range(vec.size)])
        overlaps[i] = np.vdot(vec, chi)
    x = np.atleast_1d(np.asarray(phi, dtype=float))
    amp = np.exp(1j * np.outer(x, sectors)) @ overlaps
    dens = np.abs(amp) ** 2 / (2.0 * np.pi)
    return dens.reshape(np.shape(phi)) if np.ndim(phi) else float(dens[0])


def coupling_to_shift(kappa: float, delta_t: float) -> float:
    """Global coupling constant ``psi = 2 kappa delta_t``."""
    return 2.0 * kappa * delta_t


def coupling_shift_to_phase(psi: float) -> float:
    """Phase conjugate to ``D`` produced by ``U_psi``: ``psi / 2`` (``J_z = D/2``)."""
    return psi / 2.0
