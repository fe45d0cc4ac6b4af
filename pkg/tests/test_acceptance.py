"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line; the lines are printed together in the
terminal summary (see conftest.py) and when this file is run as a script.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest
from scipy.stats import kstest

from coupling_estimation.errors import InsufficientPointsError
from coupling_estimation.fock import random_state
from coupling_estimation.optimizer import (
    closed_form_check,
    fit_power_law,
    log_grid,
    single_mode_baseline,
    solve,
    stationarity_check,
    sweep,
)
from coupling_estimation.povm import (
    LevelMap,
    average_cost,
    conditional_cdf,
    conditional_density,
    full_picture_density,
    reduced_phase_vector,
)
from coupling_estimation.schwinger import (
    coupling_evolution,
    coupling_operator,
    frame_identity_residual,
    rotate_to_z,
    rotation_operator,
)
from coupling_estimation.simulate import estimator_stats, sample
from oracles import jacobi_eigh, optimizer_matrix

RESULTS: dict[int, str] = {}

FIT_RANGE = (10.0, 1000.0)
# widest grid reaching N ~ 1000; the stated [1e-3, 10] grid stops near N = 6.8
EXTENDED_GRID = (1e-10, 10.0, 60)


def record(n: int, ok: bool, detail: str) -> bool:
    RESULTS[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(RESULTS[n])
    return ok


def test_criterion_1_two_mode_scaling():
    t0 = time.perf_counter()
    outcome = sweep(log_grid(1e-3, 10.0, 60))
    pts = outcome.points(0)
    n_top = max(n for n, _ in pts)
    try:
        fixed = fit_power_law(pts, FIT_RANGE, fix_slope=-2.0)
        free = fit_power_law(pts, FIT_RANGE)
        literal = f"gamma={fixed.gamma:.4f} slope={free.slope:.4f}"
        ok = abs(fixed.gamma - 0.10) <= 0.05 and abs(free.slope + 2.0) <= 0.1
    except InsufficientPointsError:
        literal = f"grid [1e-3,10]: no points in N∈[10,1000] (max N={n_top:.2f})"
        ok = False
    ext = sweep(log_grid(*EXTENDED_GRID)).points(0)
    e_fixed = fit_power_law(ext, FIT_RANGE, fix_slope=-2.0)
    e_free = fit_power_law(ext, FIT_RANGE)
    detail = (
        f"{literal}; grid [1e-10,10]: gamma={e_fixed.gamma:.4f} (target 0.10±0.05), "
        f"free slope={e_free.slope:.4f} (target -2±0.1), n={e_fixed.n_points}, "
        f"{time.perf_counter() - t0:.1f}s"
    )
    assert record(1, ok, detail), detail


def test_criterion_2_branches_above_ground():
    grid = log_grid(1e-3, 10.0, 60)
    res = sweep(grid, branches=4)
    # ground curve on a wider grid so every excited-branch energy is bracketed
    n_hi = max(r.energy for r in res.results)
    lo = 1e-3
    while solve(lo).energy < n_hi:
        lo /= 10
    ground = sorted(sweep(log_grid(lo, 20.0, 200)).points(0))
    n0, c0 = np.log(np.array(ground)).T
    worst = math.inf
    count = 0
    for r in res.results:
        if r.branch_index == 0:
            continue
        base = math.exp(np.interp(math.log(r.energy), n0, c0))
        worst = min(worst, r.average_cost - base)
        count += 1
    ok = count == 3 * len(grid) and worst > 0
    detail = f"{count} excited points, min(C - C_ground(N)) = {worst:.3e}"
    assert record(2, ok, detail), detail


def test_criterion_3_bessel_closed_form():
    checks = [closed_form_check(mu) for mu in (0.05, 0.1, 0.5)]
    dev = max(c.max_deviation for c in checks)
    rec = max(c.recursion_residual for c in checks)
    ok = dev <= 1e-6 and rec <= 1e-9
    detail = f"max deviation {dev:.2e} (≤1e-6), recursion residual {rec:.2e} (≤1e-9)"
    assert record(3, ok, detail), detail


def test_criterion_4_exact_fixture():
    w, v = jacobi_eigh(optimizer_matrix(1.0, 1))
    oracle_psi = np.abs(v[:, 0])
    r = solve(1.0, d_max=1)
    rep = stationarity_check(r)
    expect = {
        "lambda": (r.lam, 1.0),
        "oracle_lambda": (w[0], 1.0),
        "N": (r.energy, 1 / 3),
        "C": (r.average_cost, 2 / 3),
        "nu0": (rep.nu[0], -2 / 3),
        "nu+1": (rep.nu[1], -1 / 3),
        "nu-1": (rep.nu[-1], -1 / 3),
    }
    errs = {k: abs(a - b) for k, (a, b) in expect.items()}
    vec_err = float(np.max(np.abs(r.vector.amps - np.array([1, 2, 1]) / math.sqrt(6))))
    vec_err = max(vec_err, float(np.max(np.abs(oracle_psi - r.vector.amps))))
    worst = max(max(errs.values()), vec_err)
    ok = worst <= 1e-12
    detail = f"max error {worst:.1e} over lambda, psi, N, C, nu (≤1e-12)"
    assert record(4, ok, detail), detail


def test_criterion_5_reduced_full_equivalence():
    g = np.random.default_rng(2024)
    phi = 2 * np.pi * np.arange(4096) / 4096
    worst = 0.0
    for _ in range(12):
        s = random_state(g, int(g.integers(0, 4)), int(g.integers(0, 5)))
        theta = float(g.uniform(0, 2 * np.pi))
        full = full_picture_density(s, theta, phi)
        red = conditional_density(reduced_phase_vector(s), phi, theta)
        worst = max(worst, float(np.max(np.abs(full - red))))
    frame = max(max(frame_identity_residual(n)) for n in range(9))
    ok = worst <= 1e-10 and frame <= 1e-10
    detail = f"density gap {worst:.1e} (≤1e-10), frame identity residual {frame:.1e} (≤1e-10)"
    assert record(5, ok, detail), detail


def test_criterion_6_monte_carlo():
    r = solve(0.5)
    c_bar = average_cost(r.vector).average_cost
    theta = 0.3
    run = sample(r.vector, theta, 100_000, seed=0)
    st = estimator_stats(run)
    ks = kstest(np.mod(run.samples - theta, 2 * np.pi),
                lambda x: conditional_cdf(r.vector, x)).statistic
    ks_crit = 1.63 / math.sqrt(run.count)
    d_cost = abs(st.mean_cost - c_bar)
    d_mean = abs(st.circular_mean - theta)
    ok = d_cost <= 3 * st.cost_stderr and ks < ks_crit and d_mean <= 3 * st.circular_stderr
    detail = (
        f"|cost-C|={d_cost:.2e} vs 3se={3 * st.cost_stderr:.2e}, KS={ks:.4f} < {ks_crit:.4f}, "
        f"|mean-theta|={d_mean:.2e} vs 3se={3 * st.circular_stderr:.2e}"
    )
    assert record(6, ok, detail), detail


def test_criterion_7_single_mode_baseline():
    grid = log_grid(*EXTENDED_GRID)
    fixed = single_mode_baseline(grid, FIT_RANGE, fix_slope=-2.0)
    free = single_mode_baseline(grid, FIT_RANGE, fix_slope=None)
    ok = abs(fixed.gamma - 1.36) <= 0.2 and abs(free.slope + 2.0) <= 0.1
    detail = (
        f"gamma={fixed.gamma:.4f} (target 1.36±0.2), free slope={free.slope:.4f} (target -2±0.1), "
        f"sqrt(gamma)={fixed.delta_psi_prefactor:.4f}"
    )
    assert record(7, ok, detail), detail


def test_criterion_8_invariants():
    g = np.random.default_rng(77)
    cases = 100
    norm_err = unit_err = book_err = trunc_err = mirror_err = 0.0
    for _ in range(cases):
        s = random_state(g, int(g.integers(0, 3)), int(g.integers(0, 4)))
        psi = float(g.uniform(-np.pi, np.pi))
        norm_err = max(norm_err, abs(coupling_evolution(s, psi).norm() - 1),
                       abs(rotate_to_z(s).norm() - 1))
        total = int(g.integers(0, 12))
        unit_err = max(unit_err, coupling_operator(psi).unitarity_residual(total),
                       rotation_operator().unitarity_residual(total))

        mu = float(10 ** g.uniform(-3, 1))
        sym = int(g.integers(0, 2))
        levels = LevelMap({d: sym for d in range(-2, 3)}) if sym else None
        r = solve(mu, levels=levels)
        book_err = max(book_err, r.bookkeeping_residual)
        mirror_err = max(mirror_err, float(np.max(np.abs(r.vector.amps - r.vector.amps[::-1]))))
        big = solve(mu, levels=levels, d_max=2 * r.d_max)
        trunc_err = max(trunc_err, abs(big.average_cost - r.average_cost), abs(big.energy - r.energy))
    ok = max(norm_err, unit_err, book_err, trunc_err, mirror_err) <= 1e-10
    detail = (
        f"{cases} cases each: norm {norm_err:.1e}, unitarity {unit_err:.1e}, "
        f"bookkeeping {book_err:.1e}, doubling {trunc_err:.1e}, mirror {mirror_err:.1e} (all ≤1e-10)"
    )
    assert record(8, ok, detail), detail


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass
