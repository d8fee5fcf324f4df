"""Explicit time stepping of the inhomogeneous system.

Interfaces are numbered by the count of cells to their left: interface ``0``
is the entrance, interface ``i`` separates cells ``i - 1`` and ``i`` (0-based),
and interface ``m`` is the exit. A gate on interface 5 therefore sits between
the fifth and the sixth cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels
from .core import ADMISSIBLE_SLACK, KineticState, SpeedLattice, uniform_speed_lattice
from .errors import BoundaryError, ConfigurationError, DomainError, StabilityError
from .interaction import EnvironmentProfile, flux_limiter, interior_limiters


def _as_time_fn(x):
    if x is None or callable(x):
        return x
    value = np.array(x, dtype=np.float64)
    value.flags.writeable = False
    return lambda t: value


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary data as functions of time.

    Constants are accepted in place of functions. ``left_limiter=None`` means
    the entrance limiter is derived from the inflow density and the first
    cell, scaled by ``left_scale``. An explicit entrance limiter must not
    push more vehicles into the first cell than it has room for. Each gate
    override maps an interface to a function returning either
    a limiter value or ``None`` (standard limiter applies).
    """

    inflow: Callable[[float], np.ndarray]
    left_limiter: Optional[Callable[[float], float]] = None
    right_limiter: Callable[[float], float] = 1.0
    gate_overrides: Sequence[tuple] = field(default_factory=tuple)
    left_scale: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.left_scale <= 1.0:
            raise BoundaryError(f"left_scale must lie in [0, 1], got {self.left_scale!r}")
        object.__setattr__(self, "inflow", _as_time_fn(self.inflow))
        object.__setattr__(self, "left_limiter", _as_time_fn(self.left_limiter))
        object.__setattr__(self, "right_limiter", _as_time_fn(self.right_limiter))
        gates = tuple((int(k), _as_time_fn(fn)) for k, fn in self.gate_overrides)
        object.__setattr__(self, "gate_overrides", gates)

    @classmethod
    def closed(cls, n):
        return cls(np.zeros(n), left_limiter=0.0, right_limiter=0.0)

    def evaluate(self, t, rho_first):
        """Inflow vector, entrance limiter and exit limiter at time ``t``."""
        inflow = np.asarray(self.inflow(t), dtype=np.float64)
        if inflow.ndim != 1 or not np.all(np.isfinite(inflow)):
            raise BoundaryError(f"inflow at t={t} is not a finite vector")
        if inflow.min() < 0.0 or inflow.max() > 1.0 or inflow.sum() > 1.0 + ADMISSIBLE_SLACK:
            raise BoundaryError(f"inflow at t={t} is not admissible: {inflow!r}")
        rho_bar = min(inflow.sum(), 1.0)
        rho_first = min(max(rho_first, 0.0), 1.0)
        if self.left_limiter is None:
            left = self.left_scale * flux_limiter(rho_bar, rho_first)
        else:
            left = _check_limiter("left limiter", self.left_limiter(t), t)
            if rho_bar + rho_first > 1.0 and left * rho_bar > 1.0 - rho_first + ADMISSIBLE_SLACK:
                raise BoundaryError(
                    f"left limiter {left!r} at t={t} overfills the first cell "
                    f"(inflow density {rho_bar!r}, first cell {rho_first!r})")
        right = _check_limiter("right limiter", self.right_limiter(t), t)
        return inflow, left, right


def _check_limiter(name, value, t):
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise BoundaryError(f"{name} at t={t} is {value!r}, outside [0, 1]")
    return value


def stability_bound(profile: EnvironmentProfile) -> float:
    """Exclusive upper bound on the time step that keeps iterates admissible."""
    return 1.0 / (1.0 + 2.0 * profile.eta_bar)


def default_dt(profile: EnvironmentProfile, safety: float = 0.5) -> float:
    return 0.9 * safety * stability_bound(profile)


def face_limiters(f, t, bc: BoundarySpec, m):
    """All ``m + 1`` face limiters and the inflow at time ``t``."""
    rho = f.sum(axis=1)
    inflow, left, right = bc.evaluate(t, rho[0])
    phi = interior_limiters(rho, left, right)
    for k, fn in bc.gate_overrides:
        if not 0 <= k <= m:
            raise BoundaryError(f"gate on interface {k} outside 0..{m}")
        value = fn(t)
        if value is not None:
            phi[k] = _check_limiter(f"gate {k}", value, t)
    return phi, inflow


def _advance(f, t, bc, profile, dt, speeds):
    m, n = f.shape
    phi, inflow = face_limiters(f, t, bc, m)
    if inflow.size != n:
        raise BoundaryError(f"inflow has {inflow.size} classes, state has {n}")
    out = kernels.euler_step(f, speeds, phi, inflow, profile.alpha, profile.beta, profile.eta0, dt)
    return out, phi, inflow


def _check_step_args(f, profile, dt, lattice):
    if not dt > 0 or not np.isfinite(dt):
        raise StabilityError(f"time step must be positive, got {dt!r}")
    bound = stability_bound(profile)
    if dt >= bound:
        raise StabilityError(f"time step {dt!r} violates dt < 1/(1 + 2 eta_bar) = {bound!r}")
    if profile.m != f.shape[0]:
        raise ConfigurationError(f"profile covers {profile.m} cells, state has {f.shape[0]}")
    lattice = lattice or uniform_speed_lattice(f.shape[1])
    if lattice.n != f.shape[1]:
        raise DomainError(f"lattice has {lattice.n} classes, state has {f.shape[1]}")
    return np.ascontiguousarray(lattice.speeds)


def step(state: KineticState, bc: BoundarySpec, profile: EnvironmentProfile, dt: float,
         lattice: SpeedLattice | None = None) -> KineticState:
    """One explicit step of size ``dt`` from ``state``."""
    f = np.ascontiguousarray(state.f)
    speeds = _check_step_args(f, profile, dt, lattice)
    out, _, _ = _advance(f, state.t, bc, profile, dt, speeds)
    return KineticState(out, state.t + dt)


@dataclass(frozen=True)
class Trajectory:
    """Recorded run.

    ``f[k]`` is the snapshot at ``times[k]``. The boundary bookkeeping arrays
    have one row per step regardless of the recording stride: ``phi[s]`` holds
    the face limiters and ``inflow[s]`` the inflow used by step ``s``.
    """

    times: np.ndarray
    f: np.ndarray
    dt: float
    stride: int
    phi: np.ndarray
    inflow: np.ndarray
    speeds: np.ndarray

    @property
    def states(self):
        return [KineticState(fk, tk) for fk, tk in zip(self.f, self.times)]

    @property
    def T(self) -> float:
        return float(self.times[-1])

    @property
    def steps(self) -> int:
        return self.phi.shape[0]

    def __len__(self):
        return self.times.size


def n_steps(T, dt):
    N = int(round(T / dt))
    if N < 0 or abs(N * dt - T) > 1e-9 * max(1.0, abs(T)):
        raise ConfigurationError(f"horizon T={T!r} is not an integer multiple of dt={dt!r}")
    return N


def simulate(initial: KineticState, bc: BoundarySpec, profile: EnvironmentProfile,
             dt: float | None = None, T: float = 0.0, stride: int = 1,
             lattice: SpeedLattice | None = None) -> Trajectory:
    """Iterate :func:`step` up to ``T`` and record every ``stride``-th state.

    The final state is always recorded.
    """
    dt = default_dt(profile) if dt is None else float(dt)
    f = np.array(initial.f, dtype=np.float64, order="C")
    speeds = _check_step_args(f, profile, dt, lattice)
    N = n_steps(T, dt)
    if stride < 1:
        raise ConfigurationError(f"stride must be >= 1, got {stride}")
    m, n = f.shape
    phis = np.empty((N, m + 1))
    inflows = np.empty((N, n))
    times = [initial.t]
    snaps = [f.copy()]
    for s in range(N):
        t = initial.t + s * dt
        f, phis[s], inflows[s] = _advance(f, t, bc, profile, dt, speeds)
        if (s + 1) % stride == 0 or s + 1 == N:
            times.append(initial.t + (s + 1) * dt)
            snaps.append(f)
    return Trajectory(np.array(times), np.array(snaps), dt, stride, phis, inflows,
                      speeds.copy())


def interpolate(traj: Trajectory, t: float) -> KineticState:
    """Piecewise-linear interpolant of the recorded snapshots."""
    times = traj.times
    if not times[0] <= t <= times[-1]:
        raise DomainError(f"t={t!r} outside [{times[0]}, {times[-1]}]")
    k = int(np.searchsorted(times, t, side="right")) - 1
    if k >= times.size - 1:
        return KineticState(traj.f[-1], times[-1])
    t0, t1 = times[k], times[k + 1]
    if t == t0:
        return KineticState(traj.f[k], t0)
    w = (t - t0) / (t1 - t0)
    return KineticState((1.0 - w) * traj.f[k] + w * traj.f[k + 1], t)
