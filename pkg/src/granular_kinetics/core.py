"""State space of the model: road cells times a lattice of speed classes.

Everything here is dimensionless: cells have unit length, speeds run from 0 to
1 and the distribution ``f[i, j]`` is the fraction of the per-cell capacity
occupied by vehicles in cell ``i`` travelling at speed class ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvalidLatticeError, InvalidUnitsError

#: Slack used when checking membership of the admissible set.
ADMISSIBLE_SLACK = 1e-12


@dataclass(frozen=True)
class SpeedLattice:
    speeds: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.speeds, dtype=np.float64)
        if v.ndim != 1 or v.size < 2:
            raise InvalidLatticeError("a speed lattice needs at least two classes")
        if v[0] != 0.0 or v[-1] != 1.0:
            raise InvalidLatticeError("speed lattice must start at 0 and end at 1")
        if np.any(np.diff(v) <= 0):
            raise InvalidLatticeError("speeds must be strictly increasing")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "speeds", v)

    @property
    def n(self) -> int:
        return self.speeds.size


def uniform_speed_lattice(n: int) -> SpeedLattice:
    """Evenly spaced lattice ``v_j = j / (n - 1)`` for ``j = 0..n-1``."""
    if int(n) != n or n < 2:
        raise InvalidLatticeError(f"n must be an integer >= 2, got {n!r}")
    n = int(n)
    return SpeedLattice(np.arange(n, dtype=np.float64) / (n - 1))


@dataclass(frozen=True)
class RoadGeometry:
    m: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"road needs at least one cell, got m={self.m!r}")


@dataclass(frozen=True)
class KineticState:
    """Immutable snapshot ``f`` (shape ``m x n``) at time ``t``."""

    f: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        f = np.array(self.f, dtype=np.float64, copy=True)
        if f.ndim != 2:
            raise DomainError("state must be an m x n matrix")
        f.flags.writeable = False
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "t", float(self.t))

    @classmethod
    def zeros(cls, m: int, n: int, t: float = 0.0) -> "KineticState":
        return cls(np.zeros((m, n)), t)

    @property
    def m(self) -> int:
        return self.f.shape[0]

    @property
    def n(self) -> int:
        return self.f.shape[1]

    @property
    def density(self) -> np.ndarray:
        return self.f.sum(axis=1)

    def violations(self, slack: float = ADMISSIBLE_SLACK) -> list[str]:
        return admissibility_violations(self.f, slack)

    def is_admissible(self, slack: float = ADMISSIBLE_SLACK) -> bool:
        return not self.violations(slack)

    def with_f(self, f, t=None) -> "KineticState":
        return KineticState(f, self.t if t is None else t)


def admissibility_violations(f: np.ndarray, slack: float = ADMISSIBLE_SLACK) -> list[str]:
    """Describe every way ``f`` leaves the admissible set (empty if none)."""
    f = np.asarray(f)
    out = []
    if not np.all(np.isfinite(f)):
        out.append("non-finite entries")
        return out
    lo = f.min(initial=0.0)
    hi = f.max(initial=0.0)
    if lo < -slack:
        i, j = np.unravel_index(np.argmin(f), f.shape)
        out.append(f"f[{i},{j}]={lo!r} < 0")
    if hi > 1.0 + slack:
        i, j = np.unravel_index(np.argmax(f), f.shape)
        out.append(f"f[{i},{j}]={hi!r} > 1")
    rho = f.sum(axis=-1)
    if rho.size and rho.max() > 1.0 + slack:
        i = int(np.argmax(rho))
        out.append(f"density of cell {i} is {rho.max()!r} > 1")
    return out


@dataclass(frozen=True)
class MacroFields:
    """Per-cell moments. ``u`` holds NaN where the cell is empty; use
    :attr:`u_defined` rather than testing for NaN by hand."""

    rho: np.ndarray
    q: np.ndarray
    u: np.ndarray
    theta: np.ndarray
    u_defined: np.ndarray = field(repr=False)


def macroscopic_fields(state, lattice: SpeedLattice) -> MacroFields:
    f = state.f if isinstance(state, KineticState) else np.asarray(state, dtype=np.float64)
    f = np.atleast_2d(f)
    v = lattice.speeds
    if f.shape[-1] != v.size:
        raise DomainError(f"state has {f.shape[-1]} speed classes, lattice has {v.size}")
    rho = f.sum(axis=-1)
    q = f @ v
    defined = rho > 0.0
    safe = np.where(defined, rho, 1.0)
    u = np.where(defined, q / safe, np.nan)
    u0 = np.where(defined, u, 0.0)
    dev = (v[None, :] - u0[:, None]) ** 2
    theta = np.where(defined, (dev * f).sum(axis=-1) / safe, 0.0)
    return MacroFields(rho=rho, q=q, u=u, theta=theta, u_defined=defined)


def total_vehicles(state) -> float:
    f = state.f if isinstance(state, KineticState) else np.asarray(state)
    return float(f.sum())


@dataclass(frozen=True)
class PhysicalUnits:
    ell: float
    Vmax: float
    Nmax: float
    eta0_phys: float = 1.0

    def __post_init__(self):
        for name in ("ell", "Vmax", "Nmax", "eta0_phys"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise InvalidUnitsError(f"{name} must be strictly positive, got {value!r}")


def nondimensionalize(units: PhysicalUnits, eta_phys: float | None = None) -> float:
    """Dimensionless interaction rate coefficient ``ell * Nmax / (2 Vmax) * eta``.

    ``eta_phys`` defaults to ``units.eta0_phys``.
    """
    if eta_phys is None:
        eta_phys = units.eta0_phys
    if not np.isfinite(eta_phys) or eta_phys <= 0:
        raise InvalidUnitsError(f"physical interaction rate must be positive, got {eta_phys!r}")
    return units.ell * units.Nmax / (2.0 * units.Vmax) * eta_phys


def dimensionless_time(units: PhysicalUnits, t):
    return units.Vmax / units.ell * np.asarray(t, dtype=np.float64)


def dimensionless_speed(units: PhysicalUnits, v):
    return np.asarray(v, dtype=np.float64) / units.Vmax


def physical_time(units: PhysicalUnits, t_star):
    return units.ell / units.Vmax * np.asarray(t_star, dtype=np.float64)
