"""Two-mode Fock space, the |n, d>> labels, and the frame rotation.

Run:  python demos/01_frames_and_basis.py
"""

import numpy as np

from coupling_estimation.fock import BasisLabel, TwoModeState, basis_label_to_modes, decompose
from coupling_estimation.schwinger import (
    coupling_evolution,
    frame_identity_residual,
    generator_block,
    rotate_to_z,
    single_photon_transmission,
)

# Labels: d is the photon-number difference, n the smaller of the two counts.
for lab in [BasisLabel(0, 0), BasisLabel(2, -1), BasisLabel(1, 3)]:
    print(f"|n={lab.n}, d={lab.d}>>  ->  modes {basis_label_to_modes(lab)},  energy {lab.energy}")

# J_x in the one-photon block swaps the photon between modes.
print("\nJ_x block, N=1:\n", generator_block("Jx", 1).real)

one_in_a = TwoModeState({BasisLabel(0, 1): 1.0}, 0, 1)
for psi in (0.0, np.pi / 2, np.pi):
    out = coupling_evolution(one_in_a, psi)
    stay = abs(out.amplitude(0, 1)) ** 2
    print(f"psi={psi:.3f}: P(photon stays in a) = {stay:.4f}  (cos^2(psi/2) = {single_photon_transmission(psi):.4f})")

# The rotation turns J_x into J_z, so the coupling becomes a phase shift in d.
print("\nframe identity residuals per block (U Jx U^dag - Jz, U Jz U^dag + Jx):")
for total in range(0, 9, 2):
    print(f"  N={total}: {frame_identity_residual(total)}")

# Any state splits into eigenspaces of D with weights gamma_d.
state = TwoModeState({(0, 1): 1, (1, 1): 1, (0, -2): 1}, 1, 2).normalize()
dec = decompose(rotate_to_z(state))
print("\ngamma_d of the rotated state:", {d: round(w, 4) for d, w in sorted(dec.weights.items())})
