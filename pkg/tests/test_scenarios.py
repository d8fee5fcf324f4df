import numpy as np
import pytest

from granular_kinetics.dynamics import simulate, step
from granular_kinetics.errors import DomainError
from granular_kinetics.scenarios import GateSchedule, build_roadworks, build_traffic_light, roadworks_alpha
from granular_kinetics.verify import segment_mass_balance


def test_roadworks_setup():
    initial, bc, profile = build_roadworks(0.4)
    assert initial.f.sum() == 0 and initial.f.shape == (10, 6)
    np.testing.assert_allclose(bc.inflow(3.0), np.full(6, 0.4 / 6))
    assert profile.alpha[0] == 0.61 and profile.alpha[-1] == 0.5
    assert profile.beta == 0 and profile.eta0 == 1
    assert np.all(np.diff(profile.alpha) <= 0)
    assert np.all((profile.alpha >= 0.5) & (profile.alpha <= 0.61))
    np.testing.assert_allclose(profile.alpha[5:9], [0.588, 0.566, 0.544, 0.522])
    assert np.all(build_roadworks(0.4, variable=False)[2].alpha == 0.61)
    for bad in (0.0, 1.2):
        with pytest.raises(DomainError):
            build_roadworks(bad)


def test_literal_formula_variant():
    a = roadworks_alpha(literal_formula=True)
    np.testing.assert_allclose(a[5:9], [(31 - i / 10) / 40 for i in range(6, 10)])
    assert a[5] > 0.61


def test_roadworks_entrance_limiter():
    initial, bc, profile = build_roadworks(0.8)
    traj = simulate(initial, bc, profile, None, 30.0)
    rho1 = traj.f[:-1, 0].sum(axis=1)
    expected = np.where(0.8 + rho1 > 1, (1 - rho1) / 0.8, 1.0)
    np.testing.assert_allclose(traj.phi[:, 0], expected, atol=1e-15)
    assert np.all(traj.phi[:, -1] == 1)


def test_traffic_light_setup():
    initial, bc, profile, gate = build_traffic_light(3)
    assert initial.f.sum() == 3
    assert np.all(initial.f[2:5, 0] == 1) and initial.f[:2].sum() == 0 and initial.f[5:].sum() == 0
    assert profile.beta == 1 and np.all(profile.alpha == 0.55)
    assert np.all(bc.inflow(1.0) == 0)
    for bad in (0, 6, 2.5):
        with pytest.raises(DomainError):
            build_traffic_light(bad)


def test_gate_schedule():
    g = GateSchedule(5, 20.0, 10.0)
    assert g(0.0) is None and g(9.99) is None
    assert g(10.0) == 0.0 and g(19.9) == 0.0 and g(20.0) is None
    with pytest.raises(DomainError):
        GateSchedule(5, 10.0, 12.0)


def test_traffic_light_frozen_without_anticipation():
    initial, bc, profile, _ = build_traffic_light(5, beta=0.0)
    traj = simulate(initial, bc, profile, None, 150.0)
    assert np.all(traj.f == initial.f)


def test_traffic_light_red_phase_blocks_gate():
    initial, bc, profile, gate = build_traffic_light()
    traj = simulate(initial, bc, profile, None, 60.0)
    red = np.array([gate.is_red(t) for t in traj.times[:-1]])
    seg = segment_mass_balance(traj, gate.interface)
    assert red.any() and np.all(seg.gate_flux[red] == 0)
    assert seg.left_residual <= 1e-13 and seg.right_residual <= 1e-13
    total = traj.f.sum(axis=(1, 2))
    assert np.all(np.diff(total) <= 1e-15)
    assert total[-1] < total[0]
    left = traj.f[:, :5].sum(axis=(1, 2))
    # during red the queue side neither gains nor loses
    k = np.flatnonzero(red)
    np.testing.assert_allclose(left[k + 1], left[k], atol=1e-14)
