"""Command-line entry point: ``granular-kinetics <diagram|simulate|verify>``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import platform
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .config import RunConfig, load_config
from .core import KineticState, macroscopic_fields, uniform_speed_lattice
from .dynamics import BoundarySpec, default_dt, simulate
from .errors import (BoundaryError, ConfigurationError, ConvergenceError, DomainError,
                     StabilityError)
from .homogeneous import argmax_theta, default_rho_grid, fundamental_diagram
from .interaction import EnvironmentProfile
from .scenarios import build_roadworks, build_traffic_light
from . import verify as vf

log = logging.getLogger("granular_kinetics")

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_VERIFY = 0, 1, 2, 3


def fmt(x) -> str:
    """17 significant digits; NaN and None become an empty field."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    return "" if math.isnan(x) else "%.17g" % x


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])


def read_csv(path) -> dict:
    """Columns of a CSV written by this tool; numeric columns come back as
    float arrays with NaN for empty fields."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols = list(zip(*reader)) or [()] * len(header)
    out = {}
    for name, col in zip(header, cols):
        try:
            out[name] = np.array([float(v) if v != "" else np.nan for v in col])
        except ValueError:
            out[name] = list(col)
    return out


def _alpha_tag(a):
    return ("%g" % a).replace(".", "p")


def scenario_from_config(cfg: RunConfig):
    """``(initial, bc, profile)`` for the configured scenario."""
    sc = cfg.scenarios
    eta0 = cfg.interaction.eta0
    if sc.name == "roadworks":
        return build_roadworks(sc.rho0, sc.variable, sc.literal_formula, eta0)
    if sc.name == "traffic_light":
        return build_traffic_light(sc.queue_cells, sc.beta, sc.alpha, sc.period, sc.green,
                                   eta0)[:3]
    m, n = cfg.core.m, cfg.core.n
    alpha = cfg.interaction.alpha
    alpha = np.asarray(alpha if isinstance(alpha, list) else [alpha] * m, dtype=np.float64)
    profile = EnvironmentProfile(alpha, cfg.interaction.beta, eta0)
    dens = np.asarray(sc.initial_density if isinstance(sc.initial_density, list)
                      else [sc.initial_density] * m, dtype=np.float64)
    initial = KineticState(np.repeat(dens[:, None] / n, n, axis=1))
    bc = BoundarySpec(np.full(n, sc.inflow_density / n), left_limiter=sc.left_limiter,
                      right_limiter=sc.right_limiter)
    return initial, bc, profile


def _dt_and_T(cfg, profile):
    dt = cfg.dynamics.dt if cfg.dynamics.dt is not None else default_dt(profile)
    return dt, cfg.dynamics.T


def run_diagram(cfg: RunConfig, out: Path, jobs: int):
    h = cfg.homogeneous
    grid = np.asarray(h.rho) if h.rho is not None else default_rho_grid(h.rho_step)
    lattice = uniform_speed_lattice(cfg.core.n)
    files, summary, gaps = [], [], 0
    for a in h.alpha:
        d = fundamental_diagram(a, grid, lattice, cfg.interaction.eta0, h.tol, h.max_steps,
                                jobs, h.limit_at_zero)
        name = f"diagram_alpha_{_alpha_tag(a)}.csv"
        write_csv(out / name, ["rho", "q", "u", "theta"],
                  zip(d.rho_grid, d.q_inf, d.u_inf, d.theta_inf))
        files.append(name)
        gaps += len(d.failures)
        try:
            rc = argmax_theta(d)
        except ConvergenceError:
            rc = math.nan
        summary.append((a, rc, len(d.failures), d.max_drift))
        for r, msg in d.failures.items():
            log.warning("alpha=%s rho=%s did not converge: %s", a, r, msg)
    write_csv(out / "diagram_summary.csv", ["alpha", "rho_c", "gaps", "max_drift"], summary)
    files.append("diagram_summary.csv")
    code = EXIT_CONVERGENCE if gaps and not h.allow_gaps else EXIT_OK
    return code, files


def run_simulate(cfg: RunConfig, out: Path):
    initial, bc, profile = scenario_from_config(cfg)
    dt, T = _dt_and_T(cfg, profile)
    traj = simulate(initial, bc, profile, dt, T, cfg.dynamics.stride)
    lattice = uniform_speed_lattice(initial.n)
    rows = []
    for t, f in zip(traj.times, traj.f):
        mf = macroscopic_fields(f, lattice)
        for i in range(f.shape[0]):
            u = mf.u[i] if mf.u_defined[i] else None
            rows.append((t, i + 1, mf.rho[i], mf.q[i], u, mf.theta[i]))
    name = f"simulate_{cfg.scenarios.name}.csv"
    write_csv(out / name, ["t", "cell", "rho", "q", "u", "theta"], rows)
    return EXIT_OK, [name]


def run_verify(cfg: RunConfig, out: Path):
    v = cfg.verify
    rows, lines, files = [], [], []
    ok_all = True

    def record(check, quantity, value, passed):
        nonlocal ok_all
        ok_all &= bool(passed)
        rows.append((check, quantity, value, passed))

    def scenario():
        return scenario_from_config(cfg)

    initial, bc, profile = scenario()
    dt, T = _dt_and_T(cfg, profile)
    if "invariance" in v.checks:
        rep = vf.check_invariance(v.trials, v.steps, cfg.seed, dt_factor=v.dt_factor)
        record("invariance", "violations", len(rep.violations), rep.passed)
        write_csv(out / "verify_invariance.csv", ["trial", "step", "problems"],
                  [(x["trial"], x["step"], "; ".join(x["problems"])) for x in rep.violations])
        files.append("verify_invariance.csv")
    traj = None
    if "mass_balance" in v.checks or "equicontinuity" in v.checks:
        traj = simulate(initial, bc, profile, dt, T)
    if "mass_balance" in v.checks:
        tol = 1e-12 * initial.m * initial.n
        r = vf.check_mass_balance(traj)
        record("mass_balance", "max_residual", r, r <= tol)
    if "equicontinuity" in v.checks:
        rep = vf.check_equicontinuity(traj, profile.eta_bar, v.pairs, cfg.seed)
        record("equicontinuity", "violations", len(rep.violations), rep.passed)
        record("equicontinuity", "worst_ratio", rep.worst_ratio, rep.passed)
    if "convergence" in v.checks:
        rep = vf.check_convergence(scenario, v.convergence_T, dt, v.levels, tuple(v.band))
        for k, d in enumerate(rep.successive):
            record("convergence", f"distance_{k}", d, rep.monotone)
        for k, r in enumerate(rep.ratios):
            record("convergence", f"ratio_{k}", r, v.band[0] <= r <= v.band[1])
        record("convergence", "order", rep.order, rep.passed)
    if "dependence" in v.checks:
        rep = vf.check_continuous_dependence(scenario, tuple(v.deltas), v.dependence_T, dt,
                                             cfg.seed)
        record("dependence", "zero_gap", rep.zero_gap, rep.zero_gap == 0.0)
        for d, g in zip(rep.deltas, rep.gaps):
            record("dependence", f"gap_{d:g}", g, True)
        lo, hi = v.dependence_band
        for k, r in enumerate(rep.ratios):
            record("dependence", f"ratio_{k}", r, lo <= r <= hi)
        record("dependence", "K", rep.K, math.isfinite(rep.K))
    write_csv(out / "verify_report.csv", ["check", "quantity", "value", "passed"], rows)
    for check, q, value, passed in rows:
        lines.append(f"{'PASS' if passed else 'FAIL'} {check} {q} = {fmt(value)}")
    (out / "verify_summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    files += ["verify_report.csv", "verify_summary.txt"]
    return (EXIT_OK if ok_all else EXIT_VERIFY), files


def run(cfg: RunConfig, out=None, jobs=None) -> int:
    """Execute a validated configuration; returns the process exit code."""
    out = Path(out if out is not None else cfg.out)
    jobs = jobs or cfg.jobs
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    files = []
    try:
        if cfg.command == "diagram":
            code, files = run_diagram(cfg, out, jobs)
        elif cfg.command == "simulate":
            code, files = run_simulate(cfg, out)
        else:
            code, files = run_verify(cfg, out)
    except (ConfigurationError, StabilityError, BoundaryError, DomainError) as exc:
        log.error("%s", exc)
        code = EXIT_CONFIG
    except ConvergenceError as exc:
        log.error("%s", exc)
        code = EXIT_CONVERGENCE
    manifest = {
        "command": cfg.command,
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "jobs": jobs,
        "exit_code": code,
        "files": files,
        "wall_time_s": time.perf_counter() - start,
        "versions": {
            "granular_kinetics": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
            "kernel_backend": kernels.BACKEND,
        },
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str) + "\n",
                                       encoding="utf-8")
    return code


def _setup_logging():
    level = os.environ.get("GK_LOG", "info").strip().lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.INFO),
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="granular-kinetics",
                                     description="Discrete kinetic traffic model runner")
    parser.add_argument("command", choices=("diagram", "simulate", "verify"))
    parser.add_argument("--config", required=True, help="TOML configuration file")
    parser.add_argument("--jobs", type=int, default=None, help="worker processes for sweeps")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=None, help="output directory")
    args = parser.parse_args(argv)
    _setup_logging()
    try:
        cfg = load_config(args.config)
        if cfg.command != args.command:
            raise ConfigurationError(
                f"command: config says {cfg.command!r}, command line says {args.command!r}")
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigurationError("seed: must be nonnegative")
            cfg = replace(cfg, seed=args.seed)
        if args.jobs is not None and args.jobs < 1:
            raise ConfigurationError("jobs: must be at least 1")
    except ConfigurationError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    return run(cfg, args.out, args.jobs)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
