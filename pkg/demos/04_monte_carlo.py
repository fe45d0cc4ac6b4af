"""Simulated measurements on the optimal state.

Run:  python demos/04_monte_carlo.py
"""

import numpy as np

from coupling_estimation.optimizer import solve
from coupling_estimation.povm import average_cost, conditional_density
from coupling_estimation.simulate import estimator_stats, sample

r = solve(0.5)
c_bar = average_cost(r.vector).average_cost
theta = 0.3
print(f"optimal state at mu'=0.5: N = {r.energy:.4f}, predicted cost = {c_bar:.5f}")

for count in (1_000, 10_000, 100_000):
    st = estimator_stats(sample(r.vector, theta, count, seed=0))
    print(f"{count:>7} draws: mean cost {st.mean_cost:.5f} ± {st.cost_stderr:.5f}, "
          f"estimate {st.circular_mean:.4f} ± {st.circular_stderr:.4f} (true {theta})")

# A coarse text histogram against the exact density.
run = sample(r.vector, theta, 100_000, seed=1)
edges = np.linspace(0, 2 * np.pi, 17)
hist, _ = np.histogram(run.samples, edges, density=True)
mid = 0.5 * (edges[1:] + edges[:-1])
for x, h, p in zip(mid, hist, conditional_density(r.vector, mid, theta)):
    print(f"phi={x:5.2f}  sampled {h:.3f}  exact {p:.3f}  " + "#" * int(60 * h))
