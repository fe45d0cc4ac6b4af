r"""Truncated two-mode Fock space in the :math:`|n, d\rangle\rangle` labelling.

A two-mode number state :math:`|a\rangle_a |b\rangle_b` is relabelled by the
eigenvalue :math:`d = a - b` of :math:`D = a^\dagger a - b^\dagger b` and the
radial index :math:`n = \min(a, b)`.  States are stored sparsely, keyed by
``(n, d)``, inside an explicit truncation box ``0 <= n <= n_max``,
``|d| <= d_max``.

Operators that conserve the total photon number :math:`2n + |d|` act on
*blocks* of fixed total number ``N``; :meth:`TwoModeState.to_blocks` and
:meth:`TwoModeState.from_blocks` convert between the sparse map and dense
block vectors indexed by the a-mode occupation ``k = 0..N``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from types import MappingProxyType
from typing import IO, Mapping, NamedTuple

import numpy as np

from .errors import NormalizationError, TruncationError

__all__ = [
    "BasisLabel",
    "TwoModeState",
    "EigenspaceDecomposition",
    "basis_label_to_modes",
    "modes_to_basis_label",
    "decompose",
    "energy_expectation",
    "random_state",
    "load_state",
    "dump_state",
    "state_from_dict",
    "state_to_dict",
]

#: accepted deviation of the norm of user input from one
INPUT_NORM_TOL = 1e-9


class BasisLabel(NamedTuple):
    """Label ``(n, d)`` of the two-mode number state :math:`|n, d\\rangle\\rangle`."""

    n: int
    d: int

    @property
    def energy(self) -> int:
        """Total photon number ``2n + |d|``."""
        return 2 * self.n + abs(self.d)


def basis_label_to_modes(label: BasisLabel) -> tuple[int, int]:
    """Photon numbers ``(a, b)`` of the state labelled ``(n, d)``.

    Examples
    --------
    >>> basis_label_to_modes(BasisLabel(1, 3))
    (4, 1)
    >>> basis_label_to_modes(BasisLabel(2, -1))
    (2, 3)
    """
    n, d = label
    if d >= 0:
        return n + d, n
    return n, n - d


def modes_to_basis_label(a: int, b: int) -> BasisLabel:
    """Inverse of :func:`basis_label_to_modes`."""
    if a < 0 or b < 0:
        raise ValueError(f"photon numbers must be non-negative, got ({a}, {b})")
    return BasisLabel(min(a, b), a - b)


def _as_label(key) -> BasisLabel:
    n, d = key
    if int(n) != n or int(d) != d:
        raise ValueError(f"basis labels must be integers, got {key!r}")
    if n < 0:
        raise ValueError(f"radial index must be non-negative, got {key!r}")
    return BasisLabel(int(n), int(d))


@dataclass(frozen=True)
class TwoModeState:
    """Pure two-mode state with sparse amplitudes on a truncated Fock space.

    Parameters
    ----------
    amplitudes : mapping
        ``(n, d) -> complex`` amplitude.  Missing labels are zero; exact
        zeros are dropped.
    n_max, d_max : int
        Truncation box.  Labels outside the box raise :class:`TruncationError`.
    """

    amplitudes: Mapping[BasisLabel, complex]
    n_max: int
    d_max: int

    def __post_init__(self):
        if self.n_max < 0 or self.d_max < 0:
            raise ValueError("truncation bounds must be non-negative")
        clean = {}
        for key, value in self.amplitudes.items():
            label = _as_label(key)
            if label.n > self.n_max or abs(label.d) > self.d_max:
                raise TruncationError(
                    f"label {tuple(label)} outside truncation "
                    f"n_max={self.n_max}, d_max={self.d_max}"
                )
            value = complex(value)
            if not np.isfinite(value):
                raise ValueError(f"non-finite amplitude at {tuple(label)}")
            if value != 0:
                clean[label] = clean.get(label, 0j) + value
        object.__setattr__(self, "amplitudes", MappingProxyType(clean))

    def __reduce__(self):
        return (TwoModeState, (dict(self.amplitudes), self.n_max, self.d_max))

    # -- basic quantities -------------------------------------------------

    def norm(self) -> float:
        return float(np.sqrt(sum(abs(v) ** 2 for v in self.amplitudes.values())))

    def is_normalized(self, tol: float = INPUT_NORM_TOL) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def normalize(self) -> "TwoModeState":
        nrm = self.norm()
        if nrm == 0:
            raise NormalizationError("cannot normalize the zero vector")
        return TwoModeState(
            {k: v / nrm for k, v in self.amplitudes.items()}, self.n_max, self.d_max
        )

    def require_normalized(self, tol: float = INPUT_NORM_TOL) -> None:
        nrm = self.norm()
        if abs(nrm - 1.0) > tol:
            raise NormalizationError(f"state norm {nrm!r} deviates from 1 by more than {tol}")

    @property
    def max_block(self) -> int:
        """Largest total photon number admitted by the truncation box."""
        return 2 * self.n_max + self.d_max

    def amplitude(self, n: int, d: int) -> complex:
        return self.amplitudes.get(BasisLabel(n, d), 0j)

    def inner(self, other: "TwoModeState") -> complex:
        """Inner product ``<self|other>``."""
        return sum(
            np.conj(v) * other.amplitudes.get(k, 0j) for k, v in self.amplitudes.items()
        )

    def scaled(self, factor: complex) -> "TwoModeState":
        return TwoModeState(
            {k: factor * v for k, v in self.amplitudes.items()}, self.n_max, self.d_max
        )

    # -- block representation ---------------------------------------------

    def to_blocks(self) -> dict[int, np.ndarray]:
        """Dense vectors per occupied total photon number.

        Entry ``k`` of block ``N`` is the amplitude of ``|k>_a |N-k>_b``.
        """
        blocks: dict[int, np.ndarray] = {}
        for label, value in self.amplitudes.items():
            a, b = basis_label_to_modes(label)
            total = a + b
            if total not in blocks:
                blocks[total] = np.zeros(total + 1, dtype=complex)
            blocks[total][a] = value
        return blocks

    @classmethod
    def from_blocks(
        cls,
        blocks: Mapping[int, np.ndarray],
        n_max: int | None = None,
        d_max: int | None = None,
    ) -> "TwoModeState":
        """Assemble a state from block vectors.

        With ``n_max``/``d_max`` omitted the truncation box is the smallest
        one holding every block in full.
        """
        if n_max is None or d_max is None:
            top = max((total for total in blocks), default=0)
            n_max = top // 2 if n_max is None else n_max
            d_max = top if d_max is None else d_max
        amps = {}
        for total, vec in blocks.items():
            vec = np.asarray(vec)
            if vec.shape != (total + 1,):
                raise ValueError(f"block {total} must have length {total + 1}")
            for a in np.flatnonzero(vec):
                amps[modes_to_basis_label(int(a), int(total - a))] = complex(vec[a])
        return cls(amps, n_max, d_max)

    def block_closure(self) -> "TwoModeState":
        """Same vector in the smallest box containing its occupied blocks in full."""
        top = max((lab.energy for lab in self.amplitudes), default=0)
        return TwoModeState(self.amplitudes, max(self.n_max, top // 2), max(self.d_max, top))


@dataclass(frozen=True)
class EigenspaceDecomposition:
    r"""Split of a state over the eigenspaces :math:`\mathcal H_d` of ``D``.

    ``weights[d]`` is :math:`\gamma_d`, ``projections[d]`` the unit vector of
    coefficients :math:`c_{n,d}` (index ``n = 0..n_max``) in canonical phase
    (first nonzero entry real positive), and ``phases[d]`` the unit complex
    number removed by that rephasing, so that
    ``amplitude(n, d) == weights[d] * phases[d] * projections[d][n]``.
    """

    weights: Mapping[int, float]
    projections: Mapping[int, np.ndarray]
    phases: Mapping[int, complex]
    n_max: int
    d_max: int

    @property
    def sectors(self) -> list[int]:
        return sorted(self.weights)

    def eigenvector(self, d: int) -> np.ndarray:
        """Coefficients over ``n`` of the normalized projection ``|d>>``."""
        return self.phases[d] * self.projections[d]

    def reconstruct(self) -> TwoModeState:
        amps = {}
        for d in self.sectors:
            coeffs = self.weights[d] * self.eigenvector(d)
            for n in np.flatnonzero(coeffs):
                amps[BasisLabel(int(n), d)] = coeffs[n]
        return TwoModeState(amps, self.n_max, self.d_max)


def decompose(state: TwoModeState) -> EigenspaceDecomposition:
    """Eigenspace weights and canonical projections of a normalized state.

    Raises
    ------
    NormalizationError
        If the norm of ``state`` deviates from one by more than 1e-9.
    """
    state.require_normalized()
    state = state.normalize()
    per_d: dict[int, np.ndarray] = {}
    for label, value in state.amplitudes.items():
        if label.d not in per_d:
            per_d[label.d] = np.zeros(state.n_max + 1, dtype=complex)
        per_d[label.d][label.n] = value

    weights, projections, phases = {}, {}, {}
    for d, coeffs in per_d.items():
        gamma = float(np.linalg.norm(coeffs))
        if gamma == 0.0:
            continue
        unit = coeffs / gamma
        lead = unit[np.flatnonzero(unit)[0]]
        phase = lead / abs(lead)
        weights[d] = gamma
        projections[d] = unit / phase
        phases[d] = complex(phase)
    return EigenspaceDecomposition(
        MappingProxyType(weights),
        MappingProxyType(projections),
        MappingProxyType(phases),
        state.n_max,
        state.d_max,
    )


def energy_expectation(state: TwoModeState) -> float:
    """Mean total photon number :math:`\\langle a^\\dagger a + b^\\dagger b \\rangle`."""
    return float(sum(abs(v) ** 2 * lab.energy for lab, v in state.amplitudes.items()))


def random_state(rng: np.random.Generator, n_max: int, d_max: int) -> TwoModeState:
    """Normalized state with complex Gaussian amplitudes filling the box."""
    amps = {
        BasisLabel(n, d): complex(rng.normal(), rng.normal())
        for n in range(n_max + 1)
        for d in range(-d_max, d_max + 1)
    }
    return TwoModeState(amps, n_max, d_max).normalize()


# -- JSON state files ------------------------------------------------------


def state_to_dict(state: TwoModeState) -> dict:
    rows = [
        {"n": lab.n, "d": lab.d, "re": float(v.real), "im": float(v.imag)}
        for lab, v in sorted(state.amplitudes.items())
    ]
    return {"n_max": state.n_max, "d_max": state.d_max, "amplitudes": rows}


def state_from_dict(doc: Mapping, normalize: bool = False) -> TwoModeState:
    """Build a state from the JSON document layout.

    Without ``normalize`` the amplitudes must already have unit norm
    (deviation at most 1e-9).
    """
    try:
        n_max = doc["n_max"]
        d_max = doc["d_max"]
        rows = doc["amplitudes"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed state document: missing {exc}") from None
    if not isinstance(n_max, int) or not isinstance(d_max, int):
        raise ValueError("n_max and d_max must be integers")
    amps: dict[BasisLabel, complex] = {}
    for row in rows:
        try:
            label = _as_label((row["n"], row["d"]))
            value = complex(float(row.get("re", 0.0)), float(row.get("im", 0.0)))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed amplitude entry {row!r}") from exc
        if label in amps:
            raise ValueError(f"duplicate amplitude for {tuple(label)}")
        amps[label] = value
    state = TwoModeState(amps, n_max, d_max)
    if normalize:
        return state.normalize()
    state.require_normalized()
    return state


def load_state(source: str | IO[str], normalize: bool = False) -> TwoModeState:
    if hasattr(source, "read"):
        doc = json.load(source)
    else:
        with open(source) as fh:
            doc = json.load(fh)
    return state_from_dict(doc, normalize=normalize)


def dump_state(state: TwoModeState, target: str | IO[str]) -> None:
    doc = state_to_dict(state)
    if hasattr(target, "write"):
        json.dump(doc, target, indent=1)
    else:
        with open(target, "w") as fh:
            json.dump(doc, fh, indent=1)
