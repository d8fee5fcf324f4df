import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from granular_kinetics.core import (KineticState, PhysicalUnits, RoadGeometry, SpeedLattice,
                                    dimensionless_speed, dimensionless_time, macroscopic_fields,
                                    nondimensionalize, physical_time, total_vehicles,
                                    uniform_speed_lattice)
from granular_kinetics.errors import DomainError, InvalidLatticeError, InvalidUnitsError


def test_uniform_lattice():
    assert uniform_speed_lattice(2).speeds.tolist() == [0.0, 1.0]
    np.testing.assert_allclose(uniform_speed_lattice(6).speeds, [0, 0.2, 0.4, 0.6, 0.8, 1.0])
    with pytest.raises(InvalidLatticeError):
        uniform_speed_lattice(1)


@pytest.mark.parametrize("speeds", [[0.0], [0.1, 1.0], [0.0, 0.9], [0.0, 0.6, 0.5, 1.0]])
def test_lattice_rejects_bad_speeds(speeds):
    with pytest.raises(InvalidLatticeError):
        SpeedLattice(np.array(speeds))


def test_lattice_is_read_only():
    lat = uniform_speed_lattice(4)
    with pytest.raises(ValueError):
        lat.speeds[1] = 0.5


def test_road_geometry():
    assert RoadGeometry(3).m == 3
    with pytest.raises(DomainError):
        RoadGeometry(0)


def test_state_copies_and_freezes():
    f = np.zeros((2, 3))
    s = KineticState(f)
    f[0, 0] = 1.0
    assert s.f[0, 0] == 0.0
    with pytest.raises(ValueError):
        s.f[0, 0] = 1.0
    assert s.is_admissible()
    assert not KineticState([[0.7, 0.7]]).is_admissible()
    assert KineticState([[-1e-13, 0.5]]).is_admissible()
    assert "f[0,0]" in KineticState([[-0.1, 0.5]]).violations()[0]


def test_empty_road_moments():
    mf = macroscopic_fields(KineticState.zeros(3, 4), uniform_speed_lattice(4))
    assert np.all(mf.rho == 0) and np.all(mf.q == 0) and np.all(mf.theta == 0)
    assert not mf.u_defined.any()


def test_moment_examples():
    lat = uniform_speed_lattice(2)
    mf = macroscopic_fields(np.array([[0.0, 0.5], [0.25, 0.25]]), lat)
    np.testing.assert_allclose(mf.rho, [0.5, 0.5])
    np.testing.assert_allclose(mf.q, [0.5, 0.25])
    np.testing.assert_allclose(mf.u, [1.0, 0.5])
    np.testing.assert_allclose(mf.theta, [0.0, 0.25])


def test_total_vehicles():
    assert total_vehicles(KineticState.zeros(4, 3)) == 0.0
    full = np.zeros((7, 3))
    full[:, 0] = 1.0
    assert total_vehicles(KineticState(full)) == 7.0


def admissible_states(max_m=5, max_n=7):
    @st.composite
    def build(draw):
        m = draw(st.integers(1, max_m))
        n = draw(st.integers(2, max_n))
        w = draw(arrays(np.float64, (m, n), elements=st.floats(0, 1)))
        rho = draw(arrays(np.float64, m, elements=st.floats(0, 1)))
        s = w.sum(axis=1, keepdims=True)
        f = np.where(s > 0, w / np.where(s > 0, s, 1), 0.0) * rho[:, None]
        return f
    return build()


@given(admissible_states())
def test_moment_bounds(f):
    lat = uniform_speed_lattice(f.shape[1])
    mf = macroscopic_fields(f, lat)
    eps = 1e-12
    assert np.all(mf.q >= -eps) and np.all(mf.q <= mf.rho + eps) and np.all(mf.rho <= 1 + eps)
    assert np.all(mf.theta >= -eps) and np.all(mf.theta <= 0.25 + eps)
    u = mf.u[mf.u_defined]
    assert np.all((u >= -eps) & (u <= 1 + eps))
    assert abs(total_vehicles(f) - mf.rho.sum()) <= 1e-12


@given(admissible_states(), st.floats(0, 1))
def test_density_and_flux_are_linear(f, c):
    lat = uniform_speed_lattice(f.shape[1])
    g = c * f[::-1]
    a, b, ab = (macroscopic_fields(x, lat) for x in (f, g, f + g))
    np.testing.assert_allclose(ab.rho, a.rho + b.rho, atol=1e-14)
    np.testing.assert_allclose(ab.q, a.q + b.q, atol=1e-14)


def test_nondimensionalize():
    assert nondimensionalize(PhysicalUnits(2, 1, 4), 1.0) == 4.0
    assert nondimensionalize(PhysicalUnits(2, 1, 1)) == 1.0
    assert nondimensionalize(PhysicalUnits(2, 1, 4, eta0_phys=0.5)) == 2.0
    u = PhysicalUnits(2.0, 1.0, 1.0)
    assert dimensionless_time(u, 1.0) == 0.5
    assert physical_time(u, dimensionless_time(u, 3.0)) == 3.0
    assert dimensionless_speed(PhysicalUnits(1, 30, 1), 15.0) == 0.5


@pytest.mark.parametrize("bad", [dict(ell=0), dict(Vmax=-1), dict(Nmax=float("nan")),
                                 dict(eta0_phys=0)])
def test_units_must_be_positive(bad):
    kw = dict(ell=1.0, Vmax=1.0, Nmax=1.0) | bad
    with pytest.raises(InvalidUnitsError):
        PhysicalUnits(**kw)
    with pytest.raises(InvalidUnitsError):
        nondimensionalize(PhysicalUnits(1, 1, 1), -2.0)
