"""Spatially homogeneous reduction and fundamental diagrams.

With every cell alike the transport term drops out and the density ``rho`` is
a constant of motion. The table of games is evaluated with the fictitious
density equal to ``rho`` and the limiter ``flux_limiter(rho, rho)``.

Time stepping here works on the shape ``p = f / rho``: with the clock
``tau = eta0 rho^2 t`` the equation becomes ``dp/dtau = sum A p p - p``,
which is independent of both ``eta0`` and the density scale. A step of
``dtau = 1/2`` keeps ``p`` nonnegative whatever ``rho`` is, whereas the
spatial step bound would need ``1 / (eta0 rho^2)`` times more steps.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import SpeedLattice, macroscopic_fields, uniform_speed_lattice
from .errors import ConvergenceError, DomainError
from .interaction import flux_limiter, game_table

log = logging.getLogger(__name__)

TOL_SS = 1e-10
MAX_STEPS = 10_000_000
DTAU = 0.5


@dataclass(frozen=True)
class HomogeneousState:
    """Per-class distribution with its density and solver diagnostics."""

    f: np.ndarray
    rho: float
    steps: int = 0
    residual: float = 0.0
    drift: float = 0.0

    @property
    def shape(self) -> np.ndarray:
        return self.f / self.rho if self.rho > 0 else np.zeros_like(self.f)


@dataclass
class FundamentalDiagram:
    """Steady-state moments over a density grid; NaN marks failed points."""

    alpha: float
    rho_grid: np.ndarray
    q_inf: np.ndarray
    u_inf: np.ndarray
    theta_inf: np.ndarray
    failures: dict = field(default_factory=dict)
    max_drift: float = 0.0


def _n(lattice):
    return lattice if isinstance(lattice, (int, np.integer)) else lattice.n


def _lattice(lattice):
    return uniform_speed_lattice(lattice) if isinstance(lattice, (int, np.integer)) else lattice


def homogeneous_rhs(state, lattice, alpha, eta0=1.0) -> np.ndarray:
    """Time derivative of the per-class values."""
    f = np.asarray(state.f if isinstance(state, HomogeneousState) else state, dtype=np.float64)
    rho = float(f.sum())
    if rho <= 0.0:
        return np.zeros_like(f)
    r = min(rho, 1.0)
    A = game_table(_n(lattice), alpha, r, flux_limiter(r, r))
    eta = eta0 * rho
    return eta * (np.einsum("hkj,h,k->j", A, f, f) - f * rho)


def _relax(f, alpha, rho_tilde, phi, eta0, dt, tol, max_steps):
    steps, r, shape_r, drift = kernels.homogeneous_relax(
        f, float(alpha), float(rho_tilde), float(phi), float(eta0), float(dt),
        tol, tol, int(max_steps))
    converged = r < tol and shape_r < tol
    return steps, r, drift, converged


def steady_state(rho, lattice, alpha, eta0=1.0, tol=TOL_SS, max_steps=MAX_STEPS,
                 initial=None) -> HomogeneousState:
    """Long-time limit of the homogeneous equation at density ``rho``.

    Starts from the uniform split unless ``initial`` (a shape or distribution
    with the right density) is given. Converged means both ``||df/dt||_1`` and
    its scale-free counterpart ``||df/dt||_1 / (eta0 rho^3)`` are below ``tol``.
    """
    n = _n(lattice)
    if not 0.0 <= rho <= 1.0:
        raise DomainError(f"density must lie in [0, 1], got {rho!r}")
    if rho == 0.0:
        return HomogeneousState(np.zeros(n), 0.0)
    if initial is None:
        f = np.full(n, rho / n)
    else:
        f = np.array(initial, dtype=np.float64)
        f *= rho / f.sum()
    dt = DTAU / (eta0 * rho * rho)
    steps, r, drift, ok = _relax(f, alpha, rho, flux_limiter(rho, rho), eta0, dt, tol, max_steps)
    state = HomogeneousState(f, float(rho), steps, r, drift)
    if not ok:
        raise ConvergenceError(
            f"no steady state at rho={rho}, alpha={alpha} after {steps} steps "
            f"(residual {r:.3g})", residual=r, steps=steps, state=state)
    return state


def limit_shape(lattice, alpha, tol=TOL_SS, max_steps=MAX_STEPS) -> HomogeneousState:
    """Steady shape ``f / rho`` in the limit ``rho -> 0+``.

    The table is frozen at zero density and a unit limiter; the returned
    state has unit mass.
    """
    n = _n(lattice)
    f = np.full(n, 1.0 / n)
    steps, r, drift, ok = _relax(f, alpha, 0.0, 1.0, 1.0, DTAU, tol, max_steps)
    state = HomogeneousState(f, 1.0, steps, r, drift)
    if not ok:
        raise ConvergenceError(
            f"no limit shape at alpha={alpha} after {steps} steps (residual {r:.3g})",
            residual=r, steps=steps, state=state)
    return state


def default_rho_grid(step=0.01):
    k = int(round(1.0 / step))
    return np.arange(k + 1) / k


def _point(args):
    rho, lattice, alpha, eta0, tol, max_steps, limit_at_zero = args
    lat = _lattice(lattice)
    try:
        if rho == 0.0:
            if not limit_at_zero:
                return 0.0, np.nan, 0.0, 0.0, None
            s = limit_shape(lat, alpha, tol, max_steps)
            mf = macroscopic_fields(s.f[None, :], lat)
            return 0.0, float(mf.u[0]), float(mf.theta[0]), s.drift, None
        s = steady_state(rho, lat, alpha, eta0, tol, max_steps)
    except ConvergenceError as exc:
        return np.nan, np.nan, np.nan, exc.state.drift if exc.state else 0.0, str(exc)
    mf = macroscopic_fields(s.f[None, :], lat)
    return float(mf.q[0]), float(mf.u[0]), float(mf.theta[0]), s.drift, None


def fundamental_diagram(alpha, rho_grid=None, lattice=6, eta0=1.0, tol=TOL_SS,
                        max_steps=MAX_STEPS, jobs=1, limit_at_zero=True) -> FundamentalDiagram:
    """Steady-state flux, speed and variance for each density in the grid.

    Points that fail to converge are NaN and listed in ``failures``. At
    ``rho = 0`` the speed and variance are those of :func:`limit_shape` when
    ``limit_at_zero`` holds; otherwise the speed is left undefined and the
    variance is 0.
    """
    grid = default_rho_grid() if rho_grid is None else np.asarray(rho_grid, dtype=np.float64)
    if grid.size and (grid.min() < 0 or grid.max() > 1 or np.any(np.diff(grid) <= 0)):
        raise DomainError("rho grid must be increasing inside [0, 1]")
    lat = lattice if isinstance(lattice, (int, np.integer)) else lattice
    tasks = [(float(r), lat, float(alpha), eta0, tol, max_steps, limit_at_zero) for r in grid]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_point, tasks))
    else:
        rows = [_point(t) for t in tasks]
    q, u, th, drift, err = zip(*rows) if rows else ((),) * 5
    failures = {float(r): e for r, e in zip(grid, err) if e is not None}
    for r, e in failures.items():
        log.info("diagram alpha=%s rho=%s: %s", alpha, r, e)
    return FundamentalDiagram(float(alpha), grid, np.array(q, float), np.array(u, float),
                              np.array(th, float), failures,
                              float(max(drift)) if drift else 0.0)


def argmax_theta(diagram: FundamentalDiagram, tie_tol=1e-12) -> float:
    """Density of the largest variance; ties go to the smaller density."""
    th = diagram.theta_inf
    ok = np.isfinite(th)
    if not ok.any():
        raise ConvergenceError(f"no converged point for alpha={diagram.alpha}")
    best = th[ok].max()
    idx = np.flatnonzero(ok & (th >= best - tie_tol))[0]
    return float(diagram.rho_grid[idx])


def critical_density(alpha, lattice=6, eta0=1.0, rho_resolution=0.01, jobs=1, **kw) -> float:
    """Density at which the steady speed variance peaks."""
    if not rho_resolution > 0:
        raise DomainError("rho_resolution must be positive")
    diag = fundamental_diagram(alpha, default_rho_grid(rho_resolution), lattice, eta0,
                               jobs=jobs, **kw)
    return argmax_theta(diag)
