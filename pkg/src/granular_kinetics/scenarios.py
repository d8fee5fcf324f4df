"""Ready-made queue scenarios on a ten-cell road with six speed classes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import KineticState
from .dynamics import BoundarySpec
from .errors import DomainError
from .interaction import EnvironmentProfile

M = 10
N = 6
ALPHA_GOOD = 0.61
ALPHA_BAD = 0.5


def roadworks_alpha(m=M, variable=True, literal_formula=False) -> np.ndarray:
    """Per-cell road quality for the roadworks road (cells numbered from 1).

    The ramp over cells 6..9 is linear between 0.61 and 0.5. The tabulated
    closed form ``(31 - i/10) / 40`` is available through ``literal_formula``
    for comparison; it lands near 0.75 rather than between the end values.
    """
    alpha = np.full(m, ALPHA_GOOD)
    if not variable:
        return alpha
    for i in range(6, m + 1):
        if i == m:
            alpha[i - 1] = ALPHA_BAD
        elif literal_formula:
            alpha[i - 1] = (31.0 - i / 10.0) / 40.0
        else:
            alpha[i - 1] = ALPHA_GOOD - 0.022 * (i - 5)
    return alpha


def build_roadworks(rho0=0.4, variable=True, literal_formula=False, eta0=1.0):
    """Empty road fed at the left by density ``rho0`` split evenly over classes.

    The entrance limiter is the standard one between the inflow density and
    the first cell, which is ``(1 - rho_1) / rho0`` once the two exceed
    capacity together and 1 before. The exit is open.
    """
    if not 0.0 < rho0 <= 1.0:
        raise DomainError(f"inflow density must lie in (0, 1], got {rho0!r}")
    initial = KineticState.zeros(M, N)
    bc = BoundarySpec(np.full(N, rho0 / N), left_limiter=None, right_limiter=1.0)
    profile = EnvironmentProfile(roadworks_alpha(M, variable, literal_formula), 0.0, eta0)
    return initial, bc, profile


@dataclass(frozen=True)
class GateSchedule:
    """Red/green cycle of a light on one interface. Green comes first."""

    interface: int = 5
    period: float = 20.0
    green: float = 10.0

    def __post_init__(self):
        if not self.period > 0 or not 0.0 <= self.green <= self.period:
            raise DomainError("need period > 0 and 0 <= green <= period")

    def is_red(self, t) -> bool:
        return (t % self.period) >= self.green

    def __call__(self, t):
        # None hands the interface back to the standard limiter
        return 0.0 if self.is_red(t) else None


def build_traffic_light(queue_cells=5, beta=1.0, alpha=0.55, period=20.0, green=None,
                        eta0=1.0):
    """Full queue of standing cars behind a light at interface 5, empty road ahead."""
    if int(queue_cells) != queue_cells or not 1 <= queue_cells <= 5:
        raise DomainError(f"queue_cells must be an integer in 1..5, got {queue_cells!r}")
    gate = GateSchedule(5, period, period / 2 if green is None else green)
    f = np.zeros((M, N))
    f[gate.interface - int(queue_cells):gate.interface, 0] = 1.0
    initial = KineticState(f)
    bc = BoundarySpec(np.zeros(N), left_limiter=None, right_limiter=1.0,
                      gate_overrides=((gate.interface, gate),))
    profile = EnvironmentProfile.uniform(M, alpha, beta, eta0)
    return initial, bc, profile, gate
