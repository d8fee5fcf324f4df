"""Numerical checks of the well-posedness properties of the explicit scheme.

Distances between trajectories use the uniform norm
``||u||_inf = sup_t sum_ij |u_ij(t)|`` unless stated otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .core import ADMISSIBLE_SLACK, KineticState, admissibility_violations
from .dynamics import (BoundarySpec, Trajectory, default_dt, simulate, stability_bound)
from .errors import ConfigurationError, DomainError
from .interaction import EnvironmentProfile


def random_admissible_state(rng, m, n, edge_prob=0.1) -> np.ndarray:
    """Random point of the admissible set.

    Each cell gets ``n`` uniform weights rescaled to a uniform density.
    With probability ``edge_prob`` each a cell is made empty or full, and a
    class is zeroed, so the faces of the set get visited too.
    """
    w = rng.random((m, n))
    w[rng.random((m, n)) < edge_prob] = 0.0
    s = w.sum(axis=1, keepdims=True)
    w = np.where(s > 0, w / np.where(s > 0, s, 1.0), 1.0 / n)
    rho = rng.random(m)
    u = rng.random(m)
    rho[u < edge_prob] = 0.0
    rho[u > 1.0 - edge_prob] = 1.0
    return w * rho[:, None]


def random_boundary(rng, n, edge_prob=0.1) -> BoundarySpec:
    """Constant random inflow and exit limiter; the entrance limiter is the
    derived one scaled by a random factor, as admissibility requires."""
    inflow = random_admissible_state(rng, 1, n, edge_prob)[0]
    scale = float(rng.random()) if rng.random() < 0.5 else 1.0
    return BoundarySpec(inflow, right_limiter=float(rng.random()), left_scale=scale)


def _fast_admissible(f, slack):
    return (f.min() >= -slack and f.max() <= 1.0 + slack
            and f.sum(axis=-1).max() <= 1.0 + slack)


@dataclass
class InvarianceReport:
    trials: int
    steps: int
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def check_invariance(trials=1000, steps=200, seed=0, m_range=(1, 10), n_range=(2, 8),
                     eta0_range=(0.1, 5.0), dt_factor=0.45, slack=ADMISSIBLE_SLACK,
                     keep_states=True) -> InvarianceReport:
    """Random admissible data, ``steps`` iterations each; record every exit from B.

    The time step is ``dt_factor / (1 + 2 eta0)``; a factor of 1 or more
    trips the step precondition and raises :class:`StabilityError`.
    """
    rng = np.random.default_rng(seed)
    report = InvarianceReport(trials, steps)
    for trial in range(trials):
        m = int(rng.integers(m_range[0], m_range[1] + 1))
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        eta0 = float(rng.uniform(*eta0_range))
        profile = EnvironmentProfile(rng.random(m), float(rng.random()), eta0)
        dt = dt_factor * stability_bound(profile)
        f0 = random_admissible_state(rng, m, n)
        bc = random_boundary(rng, n)
        traj = simulate(KineticState(f0), bc, profile, dt, steps * dt)
        for k, fk in enumerate(traj.f):
            if not _fast_admissible(fk, slack):
                report.violations.append({
                    "trial": trial, "step": k, "problems": admissibility_violations(fk, slack),
                    "state": fk.copy() if keep_states else None})
                break
    return report


def mass_residuals(traj: Trajectory) -> np.ndarray:
    """Per-step residual of the discrete balance between stored mass and boundary fluxes."""
    if traj.stride != 1:
        raise ConfigurationError("mass balance needs every step recorded (stride 1)")
    v = traj.speeds
    total = traj.f.sum(axis=(1, 2))
    influx = traj.phi[:, 0] * (traj.inflow @ v)
    outflux = traj.phi[:, -1] * (traj.f[:-1, -1, :] @ v)
    return np.diff(total) - traj.dt * (influx - outflux)


def check_mass_balance(traj: Trajectory, bc: BoundarySpec | None = None) -> float:
    """Largest per-step balance residual.

    The boundary data actually used are read from the trajectory, so ``bc``
    is accepted only for symmetry with the other checks.
    """
    r = mass_residuals(traj)
    return float(np.abs(r).max()) if r.size else 0.0


@dataclass
class SegmentBalance:
    interface: int
    gate_flux: np.ndarray
    left_residual: float
    right_residual: float


def segment_mass_balance(traj: Trajectory, interface: int) -> SegmentBalance:
    """Split the road at ``interface`` and balance each side separately."""
    if traj.stride != 1:
        raise ConfigurationError("segment balance needs every step recorded (stride 1)")
    m = traj.f.shape[1]
    if not 1 <= interface <= m - 1:
        raise DomainError(f"interface must be interior, got {interface}")
    v, dt = traj.speeds, traj.dt
    prev = traj.f[:-1]
    gate = traj.phi[:, interface] * (prev[:, interface - 1, :] @ v)
    influx = traj.phi[:, 0] * (traj.inflow @ v)
    outflux = traj.phi[:, -1] * (prev[:, -1, :] @ v)
    left = traj.f[:, :interface].sum(axis=(1, 2))
    right = traj.f[:, interface:].sum(axis=(1, 2))
    rl = np.diff(left) - dt * (influx - gate)
    rr = np.diff(right) - dt * (gate - outflux)
    return SegmentBalance(interface, gate, float(np.abs(rl).max(initial=0.0)),
                          float(np.abs(rr).max(initial=0.0)))


def resample(traj: Trajectory, times) -> np.ndarray:
    """Piecewise-linear interpolant of ``traj`` at many times at once."""
    times = np.asarray(times, dtype=np.float64)
    tk = traj.times
    if times.size and (times.min() < tk[0] - 1e-12 or times.max() > tk[-1] + 1e-12):
        raise DomainError("resample times outside the trajectory")
    k = np.clip(np.searchsorted(tk, times, side="right") - 1, 0, max(tk.size - 2, 0))
    if tk.size == 1:
        return np.repeat(traj.f[:1], times.size, axis=0)
    w = np.clip((times - tk[k]) / (tk[k + 1] - tk[k]), 0.0, 1.0)[:, None, None]
    return (1.0 - w) * traj.f[k] + w * traj.f[k + 1]


def uniform_distance(a: np.ndarray, b: np.ndarray) -> float:
    """``sup_t ||a(t) - b(t)||_1`` for stacked snapshots."""
    return float(np.abs(a - b).sum(axis=(1, 2)).max())


@dataclass
class EquicontinuityReport:
    pairs: int
    bound_constant: float
    worst_ratio: float
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def check_equicontinuity(traj: Trajectory, eta_bar: float, pairs=1000, seed=0) -> EquicontinuityReport:
    """``||f(t2) - f(t1)||_1 <= 2 m n (1 + eta_bar) |t2 - t1|`` on random pairs."""
    rng = np.random.default_rng(seed)
    _, m, n = traj.f.shape
    c = 2.0 * m * n * (1.0 + eta_bar)
    t = rng.uniform(traj.times[0], traj.times[-1], size=(pairs, 2))
    f1, f2 = resample(traj, t[:, 0]), resample(traj, t[:, 1])
    lhs = np.abs(f2 - f1).sum(axis=(1, 2))
    rhs = c * np.abs(t[:, 1] - t[:, 0])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rhs > 0, lhs / rhs, 0.0)
    bad = np.flatnonzero(lhs > rhs * (1.0 + 1e-12) + 1e-15)
    viol = [(float(t[i, 0]), float(t[i, 1]), float(lhs[i]), float(rhs[i])) for i in bad]
    return EquicontinuityReport(pairs, c, float(ratio.max(initial=0.0)), viol)


@dataclass
class RefinementReport:
    dts: np.ndarray
    successive: np.ndarray
    to_finest: np.ndarray
    ratios: np.ndarray
    order: float
    band: tuple = (1.7, 2.3)

    @property
    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.successive) < 0))

    @property
    def passed(self) -> bool:
        lo, hi = self.band
        return self.monotone and bool(np.all((self.ratios >= lo) & (self.ratios <= hi)))


Scenario = Callable[[], tuple]


def check_convergence(scenario: Scenario, T: float, dt0: float | None = None, levels=4,
                      band=(1.7, 2.3), equicontinuity_pairs=0, seed=0):
    """Halve the step ``levels - 1`` times over a common horizon.

    ``scenario()`` returns ``(initial, bc, profile, ...)``. Distances between
    the interpolants of neighbouring levels are measured on the finest time
    grid. When ``equicontinuity_pairs`` is positive, each level is also run
    through :func:`check_equicontinuity` and the reports are returned
    alongside.
    """
    if levels < 3:
        raise ConfigurationError("need at least three refinement levels")
    initial, bc, profile = scenario()[:3]
    dt0 = default_dt(profile) if dt0 is None else dt0
    dts = dt0 / 2.0 ** np.arange(levels)
    trajs = [simulate(initial, bc, profile, d, T) for d in dts]
    grid = trajs[-1].times
    samples = [resample(tr, grid) for tr in trajs]
    succ = np.array([uniform_distance(a, b) for a, b in zip(samples, samples[1:])])
    finest = np.array([uniform_distance(a, samples[-1]) for a in samples[:-1]])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = succ[:-1] / succ[1:]
    ok = (succ[:-1] > 0) & (succ[1:] > 0)
    order = float(np.polyfit(np.log(dts[:-1][succ > 0]), np.log(succ[succ > 0]), 1)[0]) \
        if np.count_nonzero(succ > 0) >= 2 else float("nan")
    report = RefinementReport(dts, succ, finest, np.where(ok, ratios, np.nan), order, band)
    if equicontinuity_pairs:
        eq = [check_equicontinuity(tr, profile.eta_bar, equicontinuity_pairs, seed + k)
              for k, tr in enumerate(trajs)]
        return report, eq
    return report


@dataclass
class DependenceReport:
    deltas: np.ndarray
    data_sizes: np.ndarray
    gaps: np.ndarray
    K: float
    zero_gap: float

    @property
    def ratios(self) -> np.ndarray:
        return self.gaps[:-1] / self.gaps[1:]

    def passed(self, band=(5.0, 20.0)) -> bool:
        r = self.ratios
        return self.zero_gap == 0.0 and bool(np.all((r >= band[0]) & (r <= band[1])))


def _perturb_initial(f0, delta, direction):
    g0 = f0 + delta * direction
    if admissibility_violations(g0):
        raise DomainError(f"initial perturbation of size {delta} leaves the admissible set")
    return g0


def check_continuous_dependence(scenario: Scenario, deltas=(1e-2, 1e-3, 1e-4), T=60.0,
                                dt=None, seed=0, kind="initial") -> DependenceReport:
    """Paired runs whose data differ by ``delta``; fit ``gap <= K * data size``.

    ``kind="initial"`` adds ``delta`` times a random unit-mass distribution to
    the initial state. ``kind="inflow"`` adds ``delta / n`` to every inflow
    class. The data size is ``||f0 - g0||_1`` plus the time integral of the
    entrance limiter and inflow gaps actually used by the runs.
    """
    initial, bc, profile = scenario()[:3]
    dt = default_dt(profile) if dt is None else dt
    base = simulate(initial, bc, profile, dt, T)
    f0 = np.asarray(initial.f)
    m, n = f0.shape
    rng = np.random.default_rng(seed)
    direction = rng.random((m, n))
    direction /= direction.sum()

    def paired(delta):
        if kind == "initial":
            other = simulate(KineticState(_perturb_initial(f0, delta, direction), initial.t),
                             bc, profile, dt, T)
        elif kind == "inflow":
            shifted = replace(bc, inflow=lambda t, f=bc.inflow: np.asarray(f(t)) + delta / n)
            other = simulate(initial, shifted, profile, dt, T)
        else:
            raise ConfigurationError(f"unknown perturbation kind {kind!r}")
        size = (np.abs(other.f[0] - base.f[0]).sum()
                + dt * np.abs(other.phi[:, 0] - base.phi[:, 0]).sum()
                + dt * np.abs(other.inflow - base.inflow).sum())
        return float(size), uniform_distance(other.f, base.f)

    zero_gap = paired(0.0)[1]
    sizes, gaps = zip(*(paired(d) for d in deltas))
    sizes, gaps = np.array(sizes), np.array(gaps)
    K = float(np.max(gaps / sizes))
    return DependenceReport(np.asarray(deltas, float), sizes, gaps, K, zero_gap)
