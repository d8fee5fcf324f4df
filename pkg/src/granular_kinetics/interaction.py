"""Microscopic interaction ingredients.

Cell indices are 0-based throughout. Limiters are passed as an array ``phi``
of length ``m + 1`` where ``phi[i]`` sits on the left face of cell ``i``:
``phi[0]`` is the entrance limiter, ``phi[i + 1]`` the one cell ``i`` pushes
through, and ``phi[m]`` the exit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import KineticState, SpeedLattice
from .errors import ConfigurationError, DomainError

TABLE_TOL = 1e-12


def _check_unit_interval(name, x):
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)) or np.any(x < 0.0) or np.any(x > 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {x!r}")
    return x


@dataclass(frozen=True)
class EnvironmentProfile:
    """Road quality per cell, driver anticipation and interaction rate."""

    alpha: np.ndarray
    beta: float = 0.0
    eta0: float = 1.0

    def __post_init__(self):
        alpha = _check_unit_interval("alpha", np.atleast_1d(self.alpha)).copy()
        alpha.flags.writeable = False
        object.__setattr__(self, "alpha", alpha)
        _check_unit_interval("beta", self.beta)
        if not np.isfinite(self.eta0) or self.eta0 <= 0:
            raise DomainError(f"eta0 must be positive, got {self.eta0!r}")
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "eta0", float(self.eta0))

    @classmethod
    def uniform(cls, m, alpha, beta=0.0, eta0=1.0):
        return cls(np.full(m, float(alpha)), beta, eta0)

    @property
    def m(self) -> int:
        return self.alpha.size

    @property
    def eta_bar(self) -> float:
        """Uniform bound on the interaction rate (density never exceeds 1)."""
        return self.eta0


def flux_limiter(rho_here, rho_next):
    """Fraction of the vehicles in a cell allowed into the next one.

    Works elementwise on arrays.
    """
    u = _check_unit_interval("rho_here", rho_here)
    v = _check_unit_interval("rho_next", rho_next)
    congested = u + v > 1.0
    # u + v > 1 forces u > 0, so the division is safe where it is used
    safe_u = np.where(congested, u, 1.0)
    out = np.where(congested, (1.0 - v) / safe_u, 1.0)
    return float(out) if out.ndim == 0 else out


def interior_limiters(rho, phi_left, phi_right):
    """Assemble the ``m + 1`` face limiters from cell densities."""
    rho = np.asarray(rho, dtype=np.float64)
    phi = np.empty(rho.size + 1)
    phi[0] = phi_left
    phi[-1] = phi_right
    if rho.size > 1:
        phi[1:-1] = flux_limiter(np.clip(rho[:-1], 0.0, 1.0), np.clip(rho[1:], 0.0, 1.0))
    return phi


def fictitious_density(rho, beta, i):
    rho = np.asarray(rho, dtype=np.float64)
    if not 0 <= i < rho.size:
        raise DomainError(f"cell index {i} out of range for {rho.size} cells")
    if i == rho.size - 1:
        return float(rho[i])
    return float((1.0 - beta) * rho[i] + beta * rho[i + 1])


def fictitious_densities(rho, beta):
    rho = np.asarray(rho, dtype=np.float64)
    out = rho.copy()
    out[:-1] = (1.0 - beta) * rho[:-1] + beta * rho[1:]
    return out


def interaction_rate(eta0, rho_i):
    if eta0 <= 0:
        raise DomainError(f"eta0 must be positive, got {eta0!r}")
    return eta0 * np.asarray(rho_i, dtype=np.float64) if np.ndim(rho_i) else eta0 * float(rho_i)


def game_table(lattice: SpeedLattice | int, alpha_i, rho_tilde_i, phi_next) -> np.ndarray:
    """Table of games for one cell as an ``(n, n, n)`` array ``A[h, k, j]``.

    Candidate class ``h`` meeting field class ``k`` ends up in class ``j``
    with probability ``A[h, k, j]``. Entries are guarded against rounding
    drift: anything outside ``[-1e-12, 1 + 1e-12]`` is a bug and raises.
    """
    n = lattice if isinstance(lattice, (int, np.integer)) else lattice.n
    for name, x in (("alpha", alpha_i), ("rho_tilde", rho_tilde_i), ("phi", phi_next)):
        _check_unit_interval(name, x)
    A = kernels.game_table(int(n), float(alpha_i), float(rho_tilde_i), float(phi_next))
    if A.min() < -TABLE_TOL or A.max() > 1.0 + TABLE_TOL:
        raise AssertionError(f"table entry out of [0, 1]: min={A.min()!r} max={A.max()!r}")
    np.clip(A, 0.0, 1.0, out=A)
    return A


def check_table(A, tol=TABLE_TOL) -> list[str]:
    """List the normalization problems of a table (empty when valid)."""
    A = np.asarray(A)
    problems = []
    if A.min() < 0.0 or A.max() > 1.0:
        problems.append(f"entries outside [0, 1]: min={A.min()!r} max={A.max()!r}")
    sums = A.sum(axis=-1)
    worst = np.abs(sums - 1.0).max()
    if worst > tol:
        h, k = np.unravel_index(np.argmax(np.abs(sums - 1.0)), sums.shape)
        problems.append(f"row ({h}, {k}) sums to {sums[h, k]!r}")
    return problems


def _bilinear_gain(f_cand, f_field, table, eta):
    return eta * np.einsum("hkj,h,k->j", table, f_cand, f_field)


def gain_loss(f_row, table, eta_i):
    """Gain ``G[j]`` and loss factor ``L[j]`` of one cell.

    ``J = G - f * L`` is the net interaction term.
    """
    f_row = np.asarray(f_row, dtype=np.float64)
    G = _bilinear_gain(f_row, f_row, table, eta_i)
    L = np.full(f_row.size, eta_i * f_row.sum())
    return G, L


def interaction_operator_local(state, profile: EnvironmentProfile, limiters) -> np.ndarray:
    """Net interaction term ``J[i, j]``, one table per cell."""
    f = state.f if isinstance(state, KineticState) else np.asarray(state, dtype=np.float64)
    rho = f.sum(axis=1)
    rt = fictitious_densities(rho, profile.beta)
    J = np.empty_like(f)
    for i in range(f.shape[0]):
        A = game_table(f.shape[1], profile.alpha[i], rt[i], limiters[i + 1])
        G, L = gain_loss(f[i], A, interaction_rate(profile.eta0, rho[i]))
        J[i] = G - f[i] * L
    return J


@dataclass(frozen=True)
class NonlocalWeights:
    """Interaction horizon ``mu[i]`` and weights over cells ``i..i+mu[i]``."""

    mu: tuple
    w: tuple

    def __post_init__(self):
        mu = tuple(int(x) for x in self.mu)
        w = tuple(np.asarray(x, dtype=np.float64) for x in self.w)
        m = len(mu)
        if len(w) != m:
            raise ConfigurationError("need one weight list per cell")
        for i, (h, wi) in enumerate(zip(mu, w)):
            if h < 0 or i + h > m - 1:
                raise ConfigurationError(f"cell {i}: horizon {h} reaches past the last cell")
            if wi.shape != (h + 1,):
                raise ConfigurationError(f"cell {i}: expected {h + 1} weights, got {wi.shape}")
            if np.any(wi < 0) or abs(wi.sum() - 1.0) > 1e-12:
                raise ConfigurationError(f"cell {i}: weights must be nonnegative and sum to 1")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "w", w)

    @classmethod
    def uniform(cls, mu):
        mu = [int(x) for x in mu]
        return cls(tuple(mu), tuple(np.full(h + 1, 1.0 / (h + 1)) for h in mu))

    @classmethod
    def local(cls, m):
        return cls.uniform([0] * m)

    @property
    def m(self):
        return len(self.mu)


def interaction_operator_nonlocal(state, weights: NonlocalWeights,
                                  profile: EnvironmentProfile, limiters) -> np.ndarray:
    """Interaction term when candidates in cell ``i`` also meet field vehicles
    up to ``mu[i]`` cells ahead. The table and the rate are those of the cell
    the field vehicle sits in."""
    f = state.f if isinstance(state, KineticState) else np.asarray(state, dtype=np.float64)
    m, n = f.shape
    if weights.m != m:
        raise ConfigurationError(f"weights cover {weights.m} cells, state has {m}")
    rho = f.sum(axis=1)
    rt = fictitious_densities(rho, profile.beta)
    tables = [game_table(n, profile.alpha[l], rt[l], limiters[l + 1]) for l in range(m)]
    eta = [interaction_rate(profile.eta0, rho[l]) for l in range(m)]
    J = np.empty_like(f)
    for i in range(m):
        G = np.zeros(n)
        loss = 0.0
        for off, wl in enumerate(weights.w[i]):
            l = i + off
            G = G + wl * _bilinear_gain(f[i], f[l], tables[l], eta[l])
            loss = loss + wl * (eta[l] * rho[l])
        J[i] = G - f[i] * loss
    return J


def interaction_operator(f, profile: EnvironmentProfile, limiters) -> np.ndarray:
    """Fast local interaction term through the selected kernel backend."""
    f = np.ascontiguousarray(f, dtype=np.float64)
    rho = f.sum(axis=1)
    rt = fictitious_densities(rho, profile.beta)
    eta = profile.eta0 * rho
    G = kernels.local_gain(f, np.ascontiguousarray(profile.alpha), rt,
                           np.ascontiguousarray(limiters[1:], dtype=np.float64), eta)
    return G - f * (eta * rho)[:, None]
