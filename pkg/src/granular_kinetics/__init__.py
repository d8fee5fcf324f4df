"""Discrete-state kinetic model of vehicular traffic on a road of cells."""

__version__ = "0.1.0"

from .core import (KineticState, MacroFields, PhysicalUnits, RoadGeometry, SpeedLattice,
                   admissibility_violations, dimensionless_speed, dimensionless_time,
                   macroscopic_fields, nondimensionalize, physical_time, total_vehicles,
                   uniform_speed_lattice)
from .dynamics import (BoundarySpec, Trajectory, default_dt, interpolate, simulate,
                       stability_bound, step)
from .errors import (BoundaryError, ConfigurationError, ConvergenceError, DomainError,
                     GranularKineticsError, InvalidLatticeError, InvalidUnitsError,
                     StabilityError)
from .homogeneous import (FundamentalDiagram, HomogeneousState, critical_density,
                          fundamental_diagram, homogeneous_rhs, limit_shape, steady_state)
from .interaction import (EnvironmentProfile, NonlocalWeights, fictitious_density,
                          flux_limiter, gain_loss, game_table, interaction_operator_local,
                          interaction_operator_nonlocal, interaction_rate)
from .scenarios import build_roadworks, build_traffic_light

__all__ = [name for name in dir() if not name.startswith("_")]
