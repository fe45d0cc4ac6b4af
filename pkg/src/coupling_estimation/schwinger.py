r"""Schwinger SU(2) generators and the unitaries they generate.

With two bosonic modes ``a``, ``b``

.. math::
    J_x = \tfrac12(a^\dagger b + b^\dagger a),\quad
    J_y = \tfrac{1}{2i}(a^\dagger b - b^\dagger a),\quad
    J_z = \tfrac12(a^\dagger a - b^\dagger b).

All three commute with the total photon number, so every operator here is
block diagonal over ``N = a^\dagger a + b^\dagger b``.  Block ``N`` is a dense
``(N+1) x (N+1)`` matrix in the basis ``|k>_a |N-k>_b``, ``k = 0..N``.

Unitaries :math:`e^{-i\theta G}` are built from a spectral decomposition of
each generator block, cached per ``(generator, N)``.

Conventions
-----------
The coupling evolution is :math:`U_\psi = e^{-i J_x \psi}`.  For a single
photon entering mode ``a`` this transmits with probability
:math:`\cos^2(\psi/2)`; the beam-splitter transmittivity quoted in the
literature for this evolution is :math:`\tau = \cos^2\psi`.  Both are exposed
(:func:`single_photon_transmission`, :func:`transmittivity`) and the factor
of two between them is left as is.
"""

from __future__ import annotations

import threading
from functools import lru_cache

import numpy as np

from .errors import DomainError, NormalizationError, TruncationError
from .fock import TwoModeState, modes_to_basis_label

__all__ = [
    "GENERATORS",
    "BlockOperator",
    "generator_block",
    "blockwise_exponential",
    "apply_generator",
    "coupling_operator",
    "rotation_operator",
    "coupling_evolution",
    "rotate_to_z",
    "frame_identity_residual",
    "transmittivity",
    "single_photon_transmission",
]

GENERATORS = ("Jx", "Jy", "Jz")

_HERMITIAN_TOL = 1e-10
_STATE_NORM_TOL = 1e-9


def _ladder(total: int) -> np.ndarray:
    """Matrix elements <k+1| a^dag b |k> = sqrt((k+1)(N-k)) for k = 0..N-1."""
    k = np.arange(total)
    return np.sqrt((k + 1.0) * (total - k))


@lru_cache(maxsize=None)
def _generator_block_cached(kind: str, total: int) -> np.ndarray:
    dim = total + 1
    if kind == "Jz":
        block = np.diag(np.arange(dim) - total / 2.0).astype(complex)
    elif kind == "Jx":
        s = _ladder(total) / 2.0
        block = np.diag(s, -1) + np.diag(s, 1) + 0j
    elif kind == "Jy":
        s = _ladder(total) / 2.0
        block = np.diag(-1j * s, -1) + np.diag(1j * s, 1)
    else:
        raise ValueError(f"unknown generator {kind!r}; expected one of {GENERATORS}")
    block.setflags(write=False)
    return block


def generator_block(kind: str, total: int) -> np.ndarray:
    """Block of ``kind`` (``"Jx"``, ``"Jy"`` or ``"Jz"``) at total photon number ``total``."""
    if total < 0:
        raise ValueError("total photon number must be non-negative")
    return _generator_block_cached(kind, int(total))


@lru_cache(maxsize=None)
def _spectral(kind: str, total: int) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh(generator_block(kind, total))
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


def blockwise_exponential(generator: np.ndarray, angle: float) -> np.ndarray:
    """Return ``exp(-1j * angle * generator)`` for a Hermitian matrix.

    Computed as ``V diag(exp(-1j*angle*w)) V^dagger`` from ``numpy.linalg.eigh``.

    Raises
    ------
    DomainError
        If ``generator`` is not Hermitian to within 1e-10.
    """
    g = np.asarray(generator, dtype=complex)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise DomainError("generator must be a square matrix")
    if g.size and np.max(np.abs(g - g.conj().T)) > _HERMITIAN_TOL:
        raise DomainError("generator is not Hermitian")
    w, v = np.linalg.eigh(g)
    return _from_spectrum(w, v, angle)


def _from_spectrum(w: np.ndarray, v: np.ndarray, angle: float) -> np.ndarray:
    return (v * np.exp(-1j * angle * w)) @ v.conj().T


class BlockOperator:
    """Block-diagonal operator on the two-mode space, materialized lazily.

    Parameters
    ----------
    kind : str
        Descriptive tag (``"Jx"``, ``"Jy"``, ``"Jz"``, ``"U"`` or ``"R"``).
    builder : callable
        ``builder(N)`` returns the dense block at total photon number ``N``.
    unitary : bool
        Whether the blocks are unitary (used by :meth:`unitarity_residual`).

    Blocks are cached after first use.  Concurrent callers may build the
    same block twice; results are identical.
    """

    def __init__(self, kind: str, builder, unitary: bool = False):
        self.kind = kind
        self.unitary = unitary
        self._builder = builder
        self._blocks: dict[int, np.ndarray] = {}
        self._lock = threading.Lock()

    def block(self, total: int) -> np.ndarray:
        blk = self._blocks.get(total)
        if blk is None:
            blk = np.asarray(self._builder(total))
            blk.setflags(write=False)
            with self._lock:
                blk = self._blocks.setdefault(total, blk)
        return blk

    @property
    def blocks(self) -> dict[int, np.ndarray]:
        """Blocks materialized so far."""
        return dict(self._blocks)

    def apply_blocks(self, blocks: dict[int, np.ndarray]) -> dict[int, np.ndarray]:
        return {total: self.block(total) @ vec for total, vec in blocks.items()}

    def dagger(self) -> "BlockOperator":
        return BlockOperator(
            self.kind + "^dag", lambda total: self.block(total).conj().T, self.unitary
        )

    def unitarity_residual(self, total: int) -> float:
        """Max-norm of ``B^dag B - I`` for block ``total``."""
        blk = self.block(total)
        return float(np.max(np.abs(blk.conj().T @ blk - np.eye(total + 1))))

    def hermiticity_residual(self, total: int) -> float:
        blk = self.block(total)
        return float(np.max(np.abs(blk - blk.conj().T)))

    def __repr__(self):
        return f"BlockOperator({self.kind!r}, materialized={sorted(self._blocks)})"


def _generator_operator(kind: str) -> BlockOperator:
    return BlockOperator(kind, lambda total: generator_block(kind, total))


def coupling_operator(psi: float) -> BlockOperator:
    r""":math:`U_\psi = e^{-i J_x \psi}` as a block operator."""
    psi = float(psi)
    if not np.isfinite(psi):
        raise DomainError("shift parameter must be finite")
    return BlockOperator(
        "U", lambda total: _from_spectrum(*_spectral("Jx", total), psi), unitary=True
    )


def rotation_operator(inverse: bool = False) -> BlockOperator:
    r"""Frame rotation :math:`\mathcal U` with :math:`\mathcal U J_x \mathcal U^\dagger = J_z`.

    With :math:`J_y = (a^\dagger b - b^\dagger a)/2i` and
    :math:`[J_x, J_y] = iJ_z` this requires
    :math:`\mathcal U = e^{+i(\pi/2)J_y}`; the opposite sign maps
    :math:`J_x` onto :math:`-J_z`.
    """
    angle = np.pi / 2 if inverse else -np.pi / 2
    return BlockOperator(
        "R^dag" if inverse else "R",
        lambda total: _from_spectrum(*_spectral("Jy", total), angle),
        unitary=True,
    )


def _closed_box(state: TwoModeState, blocks) -> tuple[int, int]:
    top = max(blocks, default=0)
    return max(state.n_max, top // 2), max(state.d_max, top)


def apply_generator(kind: str, state: TwoModeState) -> TwoModeState:
    """Image of ``state`` under ``J_x``, ``J_y`` or ``J_z`` (not normalized).

    The result keeps the truncation box of ``state``.

    Raises
    ------
    TruncationError
        If a nonzero matrix element maps an occupied label outside the box.
    """
    if kind not in GENERATORS:
        raise ValueError(f"unknown generator {kind!r}; expected one of {GENERATORS}")
    if kind == "Jz":
        return TwoModeState(
            {lab: 0.5 * lab.d * v for lab, v in state.amplitudes.items()},
            state.n_max,
            state.d_max,
        )
    for lab in state.amplitudes:
        a = lab.n + max(lab.d, 0)
        total = lab.energy
        for a2 in (a - 1, a + 1):
            if 0 <= a2 <= total:
                target = modes_to_basis_label(a2, total - a2)
                if target.n > state.n_max or abs(target.d) > state.d_max:
                    raise TruncationError(
                        f"{kind} maps {tuple(lab)} onto {tuple(target)}, outside "
                        f"n_max={state.n_max}, d_max={state.d_max}"
                    )
    op = _generator_operator(kind)
    return TwoModeState.from_blocks(op.apply_blocks(state.to_blocks()), state.n_max, state.d_max)


def _apply_unitary(op: BlockOperator, state: TwoModeState) -> TwoModeState:
    nrm = state.norm()
    if abs(nrm - 1.0) > _STATE_NORM_TOL:
        raise NormalizationError(f"state norm {nrm!r} deviates from 1")
    blocks = state.to_blocks()
    n_max, d_max = _closed_box(state, blocks)
    return TwoModeState.from_blocks(op.apply_blocks(blocks), n_max, d_max)


def coupling_evolution(state: TwoModeState, psi: float) -> TwoModeState:
    r"""Apply :math:`U_\psi = e^{-i J_x \psi}` blockwise.

    ``J_x`` mixes labels within a block, so the output truncation box is
    widened to hold every occupied block in full.
    """
    return _apply_unitary(coupling_operator(psi), state)


def rotate_to_z(state: TwoModeState, inverse: bool = False) -> TwoModeState:
    r"""Apply the frame rotation :math:`\mathcal U` (or :math:`\mathcal U^\dagger`).

    :math:`\mathcal U` maps :math:`J_x` onto :math:`J_z`, turning the coupling
    evolution into a phase shift diagonal in ``d``.
    """
    return _apply_unitary(rotation_operator(inverse), state)


def frame_identity_residual(total: int) -> tuple[float, float]:
    r"""Residuals of :math:`\mathcal U J_x \mathcal U^\dagger = J_z` and
    :math:`\mathcal U J_z \mathcal U^\dagger = -J_x` on block ``total``."""
    r = rotation_operator().block(total)
    rd = r.conj().T
    jx, jz = generator_block("Jx", total), generator_block("Jz", total)
    return (
        float(np.max(np.abs(r @ jx @ rd - jz))),
        float(np.max(np.abs(r @ jz @ rd + jx))),
    )


def transmittivity(psi: float) -> float:
    r"""Beam-splitter transmittivity :math:`\tau = \cos^2\psi` as quoted for ``U_psi``.

    Note this is not the single-photon transmission probability produced by
    :math:`e^{-iJ_x\psi}`, which is :math:`\cos^2(\psi/2)`; see
    :func:`single_photon_transmission`.
    """
    return float(np.cos(psi) ** 2)


def single_photon_transmission(psi: float) -> float:
    """Probability that a photon in mode ``a`` stays in ``a`` under ``U_psi``."""
    return float(np.cos(psi / 2.0) ** 2)
