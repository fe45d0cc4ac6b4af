"""Optimal estimation of the coupling constant of a two-mode bilinear interaction.

Submodules
----------
fock         truncated two-mode Fock space, |n, d>> labels, eigenspace decomposition
schwinger    J_x, J_y, J_z blocks, coupling evolution and the frame rotation
povm         phase vectors, the adapted measurement density and the average cost
optimizer    energy-constrained cost minimization as a tridiagonal eigenproblem
simulate     Monte Carlo draws from the measurement and estimator statistics
cli          command-line entry point
"""

from .errors import (
    ConvergenceError,
    DomainError,
    GridTooCoarseError,
    InsufficientPointsError,
    NormalizationError,
    TruncationError,
)
from .fock import BasisLabel, EigenspaceDecomposition, TwoModeState, decompose
from .optimizer import OptimizationResult, ScalingFit, scaling_study, solve, sweep
from .povm import LevelMap, PhaseVector, average_cost, conditional_density
from .schwinger import coupling_evolution, rotate_to_z
from .simulate import estimator_stats, peak_check, sample

__version__ = "0.1.0"

__all__ = [
    "BasisLabel",
    "ConvergenceError",
    "DomainError",
    "EigenspaceDecomposition",
    "GridTooCoarseError",
    "InsufficientPointsError",
    "LevelMap",
    "NormalizationError",
    "OptimizationResult",
    "PhaseVector",
    "ScalingFit",
    "TruncationError",
    "TwoModeState",
    "average_cost",
    "conditional_density",
    "coupling_evolution",
    "decompose",
    "estimator_stats",
    "peak_check",
    "rotate_to_z",
    "sample",
    "scaling_study",
    "solve",
    "sweep",
]
