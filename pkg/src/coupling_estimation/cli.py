"""Command-line entry point: ``coupling-estimation <subcommand> ...``.

Exit codes: 0 success, 1 numerical failure, 2 usage error.  JSON summaries
go to ``--out`` (stdout when omitted) and always carry ``format_version`` and
the resolved ``config``.  Relative output paths are resolved against the
directory named by ``COUPLING_ESTIMATION_OUT`` when that variable is set.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import optimizer, simulate
from .errors import (
    ConvergenceError,
    DomainError,
    GridTooCoarseError,
    InsufficientPointsError,
    NormalizationError,
    TruncationError,
)
from .fock import dump_state, load_state
from .povm import (
    LevelMap,
    average_cost,
    conditional_density,
    coupling_shift_to_phase,
    full_picture_density,
    phase_vector_to_state,
    reduced_phase_vector,
)
from .schwinger import rotate_to_z

FORMAT_VERSION = 1
OUT_ENV = "COUPLING_ESTIMATION_OUT"
EVOLVE_TOL = 1e-10
BESSEL_TOL = 1e-6

_NUMERICAL = (
    ConvergenceError,
    InsufficientPointsError,
    GridTooCoarseError,
    TruncationError,
    NormalizationError,
    FloatingPointError,
)


class UsageError(Exception):
    pass


# -- flag parsing ---------------------------------------------------------------


def parse_grid(text: str) -> np.ndarray:
    """``lo:hi:steps:log|lin`` to an array of grid values."""
    parts = text.split(":")
    if len(parts) != 4 or parts[3] not in ("log", "lin"):
        raise UsageError(f"grid must look like lo:hi:steps:log|lin, got {text!r}")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"bad number in grid {text!r}") from None
    if steps < 1:
        raise UsageError("grid needs at least one step")
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo <= 0 or hi < lo:
        raise UsageError("grid bounds must satisfy 0 < lo <= hi")
    if steps == 1:
        return np.array([lo])
    if parts[3] == "log":
        return optimizer.log_grid(lo, hi, steps)
    return np.linspace(lo, hi, steps)


def parse_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"range must look like lo:hi, got {text!r}") from None
    if not 0 < lo < hi:
        raise UsageError("range must satisfy 0 < lo < hi")
    return lo, hi


def _positive_mu(mu: float) -> float:
    if not math.isfinite(mu) or mu <= 0:
        raise UsageError(f"--mu must be positive, got {mu}")
    return mu


def _nonneg(name: str, value):
    if value is not None and value < 0:
        raise UsageError(f"{name} must be non-negative")
    return value


def _load_levels(path: str | None) -> LevelMap | None:
    if path is None:
        return None
    try:
        with open(path) as fh:
            return LevelMap.from_dict(json.load(fh))
    except (OSError, ValueError, AttributeError, TypeError) as exc:
        raise UsageError(f"cannot read levels file {path}: {exc}") from None


def _load_state(path: str):
    try:
        return load_state(path)
    except OSError as exc:
        raise UsageError(f"cannot read state file: {exc}") from None
    except ValueError as exc:
        raise UsageError(f"invalid state file {path}: {exc}") from None


def _resolve(path: str | None) -> Path | None:
    if path is None or path == "-":
        return None
    p = Path(path)
    base = os.environ.get(OUT_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


# -- output helpers ---------------------------------------------------------------


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _emit_json(doc: dict, path: str | None) -> None:
    text = json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"
    target = _resolve(path)
    if target is None:
        sys.stdout.write(text)
    else:
        target.write_text(text)


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def _write_csv(path: str | None, header: list[str], rows) -> None:
    target = _resolve(path)
    fh = sys.stdout if target is None else open(target, "w", newline="")
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    finally:
        if target is not None:
            fh.close()


def _document(args, config: dict, **payload) -> dict:
    return {"format_version": FORMAT_VERSION, "command": args.command, "config": config, **payload}


def _result_dict(r: optimizer.OptimizationResult) -> dict:
    return {
        "mu_prime": r.mu_prime,
        "branch": r.branch_index,
        "lambda": r.lam,
        "lambda_prime": r.lambda_prime,
        "energy": r.energy,
        "cost": r.average_cost,
        "eigen_residual": r.eigen_residual,
        "bookkeeping_residual": r.bookkeeping_residual,
        "d_max": r.d_max,
        "half_line": r.half_line,
    }


# -- subcommands ------------------------------------------------------------------


def cmd_optimize(args) -> int:
    mu = _positive_mu(args.mu)
    _nonneg("--dmax", args.dmax)
    _nonneg("--branch", args.branch)
    levels = _load_levels(args.levels)
    config = {
        "mu_prime": mu,
        "d_max": args.dmax,
        "branch": args.branch,
        "half_line": args.half_line,
        "levels": (levels or LevelMap()).to_dict(),
    }
    r = optimizer.solve(mu, levels=levels, branch=args.branch, d_max=args.dmax,
                        half_line=args.half_line)
    payload = {"result": _result_dict(r)}
    if not args.half_line:
        rep = optimizer.stationarity_check(r)
        payload["stationarity_residual"] = rep.max_residual
    if args.vector_out:
        target = _resolve(args.vector_out)
        r.vector.dump(str(target))
        payload["vector_file"] = str(target)
    _emit_json(_document(args, config, **payload), args.out)
    return 0


def cmd_scaling(args) -> int:
    grid = parse_grid(args.grid)
    fit_range = parse_range(args.fit)
    if args.branches < 1:
        raise UsageError("--branches must be at least 1")
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    half_line = args.single_mode
    if half_line and args.branches != 1:
        raise UsageError("--single-mode supports only the ground branch")
    config = {
        "grid": args.grid,
        "grid_values": grid.tolist(),
        "fit_range": list(fit_range),
        "fix_slope": args.fix_slope,
        "branches": args.branches,
        "single_mode": half_line,
        "workers": args.workers,
    }
    outcome = optimizer.sweep(grid, branches=args.branches, half_line=half_line,
                              workers=args.workers)
    rows = [(r.mu_prime, r.branch_index, r.lam, r.energy, r.average_cost)
            for r in outcome.results]
    rows += [(m, k, math.nan, math.nan, math.nan) for m, k, _ in outcome.failures]
    _write_csv(args.csv, ["mu_prime", "branch", "lambda", "energy", "cost"], rows)

    payload: dict = {
        "failures": [{"mu_prime": m, "branch": k, "error": e} for m, k, e in outcome.failures],
        "fit": None,
        "free_fit": None,
    }
    status = 0
    pts = outcome.points(0)
    if grid.size >= 3:
        try:
            fixed = optimizer.fit_power_law(pts, fit_range, fix_slope=args.fix_slope)
            free = optimizer.fit_power_law(pts, fit_range)
            payload["fit"] = {**fixed.to_dict(), "delta_psi_prefactor": fixed.delta_psi_prefactor}
            payload["free_fit"] = free.to_dict()
        except InsufficientPointsError as exc:
            payload["fit_error"] = str(exc)
            print(f"error: {exc}", file=sys.stderr)
            status = 1
    payload["max_energy"] = max((n for n, _ in pts), default=None)
    if outcome.failures:
        status = 1
    _emit_json(_document(args, config, **payload), args.out)
    return status


def cmd_bessel_check(args) -> int:
    mu = _positive_mu(args.mu)
    _nonneg("--dmax", args.dmax)
    config = {"mu_prime": mu, "d_max": args.dmax}
    payload = {}
    if args.dmax is not None:
        warning = ("closed form assumes an untruncated ladder; "
                   f"comparison at pinned d_max={args.dmax} is informational only")
        print(f"warning: {warning}", file=sys.stderr)
        payload["warning"] = warning
    check = optimizer.closed_form_check(mu, d_max=args.dmax)
    payload.update(check._asdict())
    payload["passed"] = check.max_deviation <= BESSEL_TOL
    _emit_json(_document(args, config, **payload), args.out)
    if args.dmax is None and not payload["passed"]:
        print(f"error: deviation {check.max_deviation:.3e} exceeds {BESSEL_TOL:g}",
              file=sys.stderr)
        return 1
    return 0


def cmd_simulate(args) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    if args.grid_size < 2:
        raise UsageError("--grid-size must be at least 2")
    state = _load_state(args.state)
    config = {
        "state": args.state,
        "theta": args.theta,
        "samples": args.samples,
        "seed": args.seed,
        "grid_size": args.grid_size,
    }
    pv = reduced_phase_vector(state)
    run = simulate.sample(pv, args.theta, args.samples, seed=args.seed,
                          grid_size=args.grid_size)
    stats = simulate.estimator_stats(run)
    doc = _document(
        args, config,
        theta=run.theta_true,
        count=run.count,
        seed=run.seed,
        analytic_cost=average_cost(pv).average_cost,
        **stats.to_dict(),
    )
    if args.samples_csv:
        _write_csv(args.samples_csv, ["phi"], ((x,) for x in run.samples))
    _emit_json(doc, args.out)
    return 0


def cmd_evolve(args) -> int:
    if args.grid < 1:
        raise UsageError("--grid must be at least 1")
    state = _load_state(args.state)
    theta = coupling_shift_to_phase(args.psi)
    config = {"state": args.state, "psi": args.psi, "theta": theta, "grid": args.grid}
    phi = 2.0 * np.pi * np.arange(args.grid) / args.grid
    reduced = conditional_density(reduced_phase_vector(state), phi, theta)
    full = full_picture_density(state, theta, phi)
    gap = float(np.max(np.abs(reduced - full)))
    _write_csv(args.csv, ["phi", "density", "density_full"], zip(phi, reduced, full))
    ok = gap <= EVOLVE_TOL
    _emit_json(_document(args, config, max_discrepancy=gap, passed=ok), args.out)
    if not ok:
        print(f"error: route discrepancy {gap:.3e} exceeds {EVOLVE_TOL:g}", file=sys.stderr)
        return 1
    return 0


def cmd_state_gen(args) -> int:
    mu = _positive_mu(args.mu)
    _nonneg("--branch", args.branch)
    _nonneg("--dmax", args.dmax)
    r = optimizer.solve(mu, branch=args.branch, d_max=args.dmax)
    pv = r.vector.rephased() if args.branch else r.vector
    state = rotate_to_z(phase_vector_to_state(pv), inverse=True)
    target = _resolve(args.state_out)
    if target is None:
        dump_state(state, sys.stdout)
        sys.stdout.write("\n")
    else:
        dump_state(state, str(target))
    config = {"mu_prime": mu, "branch": args.branch, "d_max": args.dmax}
    if args.out:
        _emit_json(_document(args, config, result=_result_dict(r),
                             state_file=str(target) if target else None), args.out)
    return 0


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coupling-estimation",
                                description="Optimal estimation of a two-mode coupling constant.")
    sub = p.add_subparsers(dest="command", required=True)

    o = sub.add_parser("optimize", help="solve the energy-constrained eigenproblem at one mu'")
    o.add_argument("--mu", type=float, required=True)
    o.add_argument("--dmax", type=int)
    o.add_argument("--branch", type=int, default=0)
    o.add_argument("--levels", help="JSON level map n(d)")
    o.add_argument("--half-line", action="store_true", help="single-mode problem")
    o.add_argument("--vector-out", help="write the phase vector JSON here")
    o.add_argument("--out")
    o.set_defaults(func=cmd_optimize)

    s = sub.add_parser("scaling", help="cost versus energy sweep and power-law fit")
    s.add_argument("--grid", default="1e-3:10:60:log", help="lo:hi:steps:log|lin")
    s.add_argument("--fit", default="10:1000", help="energy range lo:hi")
    s.add_argument("--fix-slope", type=float, default=-2.0)
    s.add_argument("--branches", type=int, default=1)
    s.add_argument("--single-mode", action="store_true")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--csv", default="scaling.csv", help="row output, '-' for stdout")
    s.add_argument("--out")
    s.set_defaults(func=cmd_scaling)

    b = sub.add_parser("bessel-check", help="compare the Bessel closed form with the eigensolve")
    b.add_argument("--mu", type=float, required=True)
    b.add_argument("--dmax", type=int)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bessel_check)

    m = sub.add_parser("simulate", help="Monte Carlo draws from the optimal measurement")
    m.add_argument("--state", required=True)
    m.add_argument("--theta", type=float, default=0.0)
    m.add_argument("--samples", type=int, default=100_000)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--grid-size", type=int, default=simulate.DEFAULT_SAMPLE_GRID)
    m.add_argument("--samples-csv")
    m.add_argument("--out")
    m.set_defaults(func=cmd_simulate)

    e = sub.add_parser("evolve", help="outcome density by the reduced and full routes")
    e.add_argument("--state", required=True)
    e.add_argument("--psi", type=float, default=0.0, help="lab-frame coupling angle")
    e.add_argument("--grid", type=int, default=4096)
    e.add_argument("--csv", default="evolve.csv", help="density output, '-' for stdout")
    e.add_argument("--out")
    e.set_defaults(func=cmd_evolve)

    st = sub.add_parser("state", help="state file utilities")
    st_sub = st.add_subparsers(dest="state_command", required=True)
    g = st_sub.add_parser("gen", help="write the optimal lab-frame state")
    g.add_argument("--mu", type=float, required=True)
    g.add_argument("--branch", type=int, default=0)
    g.add_argument("--dmax", type=int)
    g.add_argument("--state-out", help="state JSON path (stdout when omitted)")
    g.add_argument("--out", help="optional summary JSON")
    g.set_defaults(func=cmd_state_gen)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except _NUMERICAL as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
