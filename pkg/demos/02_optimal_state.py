"""The optimal state at fixed energy multiplier, and its Bessel closed form.

Run:  python demos/02_optimal_state.py
"""

import numpy as np

from coupling_estimation.optimizer import (
    bessel_solution,
    boundary_root,
    closed_form_check,
    solve,
    solve_branches,
    stationarity_check,
)
from coupling_estimation.simulate import peak_check

# Smallest non-trivial case: three sectors, mu' = 1.
r = solve(1.0, d_max=1)
print("mu'=1, d_max=1:  lambda =", r.lam, " psi*sqrt(6) =", r.vector.amps * np.sqrt(6))
print("  N =", r.energy, " C =", r.average_cost, " nu =", stationarity_check(r).nu)

# Adaptive truncation at a smaller multiplier.
r = solve(0.05)
print(f"\nmu'=0.05: N={r.energy:.4f}  C={r.average_cost:.6f}  C*N^2={r.average_cost * r.energy**2:.4f}"
      f"  truncation d_max={r.d_max}  single peak: {peak_check(r.vector)}")

# The same vector from Bessel functions J_{lambda'+|d|}(2/mu').
lp = boundary_root(0.05)
closed = bessel_solution(0.05, lp)
print(f"boundary root lambda' = {lp:.12f}  (eigensolver: {r.lambda_prime:.12f})")
chk = closed_form_check(0.05)
print(f"max |closed form - eigenvector| = {chk.max_deviation:.2e},  recursion residual = {chk.recursion_residual:.2e}")
print("central amplitudes:", np.round(closed.amps[closed.amps.size // 2 - 3: closed.amps.size // 2 + 4], 5))

# Higher stationary points sit above the optimum.
for b in solve_branches(0.05, 4):
    print(f"  branch {b.branch_index}: N={b.energy:.3f}  C={b.average_cost:.4f}")
