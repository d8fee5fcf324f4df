import numpy as np
import pytest
from hypothesis import given, strategies as st

from granular_kinetics.core import KineticState, uniform_speed_lattice
from granular_kinetics.errors import ConfigurationError, DomainError
from granular_kinetics.interaction import (
    EnvironmentProfile, NonlocalWeights, check_table, fictitious_densities, fictitious_density,
    flux_limiter, gain_loss, game_table, interaction_operator, interaction_operator_local,
    interaction_operator_nonlocal, interaction_rate, interior_limiters)
from oracles import naive_gain, naive_nonlocal, naive_table
from test_core import admissible_states

unit = st.floats(0, 1)


@pytest.mark.parametrize("u, v, expected", [(0.5, 0.5, 1.0), (1.0, 1.0, 0.0), (0.8, 0.6, 0.5),
                                            (0.0, 1.0, 1.0), (0.0, 0.0, 1.0)])
def test_flux_limiter_values(u, v, expected):
    assert flux_limiter(u, v) == pytest.approx(expected, abs=1e-15)


def test_flux_limiter_domain():
    for u, v in [(-0.1, 0.5), (0.5, 1.1), (float("nan"), 0.2)]:
        with pytest.raises(DomainError):
            flux_limiter(u, v)


@given(unit, unit)
def test_flux_limiter_admissible(u, v):
    phi = flux_limiter(u, v)
    assert 0.0 <= phi <= 1.0
    if u + v > 1:
        assert phi * u <= 1 - v + 1e-15


def test_flux_limiter_vectorized():
    np.testing.assert_allclose(flux_limiter(np.array([0.5, 0.8]), np.array([0.5, 0.6])), [1, 0.5])
    np.testing.assert_allclose(interior_limiters([0.8, 0.6, 0.1], 0.3, 0.7), [0.3, 0.5, 1, 0.7])


def test_fictitious_density():
    rho = np.array([0.2, 0.4, 1.0, 0.0, 0.7])
    assert fictitious_density(rho, 0.0, 1) == 0.4
    assert fictitious_density(rho, 1.0, 2) == 0.0
    assert fictitious_density(rho, 0.3, 4) == 0.7
    assert fictitious_density(rho, 0.5, 0) == pytest.approx(0.3)
    np.testing.assert_allclose(fictitious_densities(rho, 0.5), [0.3, 0.7, 0.5, 0.35, 0.7])
    with pytest.raises(DomainError):
        fictitious_density(rho, 0.5, 5)


def test_interaction_rate():
    assert interaction_rate(1, 0) == 0
    assert interaction_rate(1, 1) == 1
    assert interaction_rate(2, 0.5) == 1
    with pytest.raises(DomainError):
        interaction_rate(0, 0.5)


def test_profile_validation():
    p = EnvironmentProfile.uniform(3, 0.6, 0.2, 2.0)
    assert p.m == 3 and p.eta_bar == 2.0
    for kw in [dict(alpha=[1.2]), dict(alpha=[0.5], beta=-0.1), dict(alpha=[0.5], eta0=0.0)]:
        with pytest.raises(DomainError):
            EnvironmentProfile(**kw)


def test_table_example_row():
    A = game_table(uniform_speed_lattice(6), 0.61, 0.5, 1.0)
    np.testing.assert_allclose(A[0, 1], [0.695, 0.305, 0, 0, 0, 0], atol=1e-15)


def test_table_stop_when_blocked():
    A = game_table(6, 0.3, 0.4, 0.0)
    np.testing.assert_array_equal(A[2, 1], [1, 0, 0, 0, 0, 0])


def test_table_frozen_queue():
    A = game_table(6, 0.55, 1.0, 1.0)
    np.testing.assert_array_equal(A[0, 0], [1, 0, 0, 0, 0, 0])
    assert np.all(A[0, :, 1:] == 0)


def test_table_two_classes_top_branch():
    # with two classes the equal-speed top class uses the last-class formula
    a, r, p = 0.7, 0.4, 0.9
    A = game_table(2, a, r, p)
    np.testing.assert_allclose(A[1, 1], [1 - p + (1 - a) * r * p, (1 - (1 - a) * r) * p])


@given(st.integers(2, 8), unit, unit, unit)
def test_table_matches_oracle(n, a, r, p):
    np.testing.assert_allclose(game_table(n, a, r, p), naive_table(n, a, r, p), atol=1e-15)


@given(st.integers(2, 8), unit, unit, unit)
def test_table_is_stochastic(n, a, r, p):
    A = game_table(n, a, r, p)
    assert check_table(A) == []


def test_check_table_reports_problems():
    A = game_table(3, 0.5, 0.5, 0.5)
    A[1, 2, 0] += 0.1
    assert any("row (1, 2)" in s for s in check_table(A))


def test_gain_loss_empty_cell():
    G, L = gain_loss(np.zeros(4), game_table(4, 0.5, 0.0, 1.0), 0.0)
    assert np.all(G == 0) and np.all(L == 0)


def test_gain_loss_two_class_hand_value():
    # f = (0.5, 0), eta = 0.5, row A[1][1] = (0.8, 0.2): G = 0.5 * 0.25 * (0.8, 0.2)
    A = game_table(2, 0.4, 0.5, 1.0)
    np.testing.assert_allclose(A[0, 0], [0.8, 0.2])
    G, L = gain_loss(np.array([0.5, 0.0]), A, 0.5)
    np.testing.assert_allclose(G, [0.1, 0.025])
    np.testing.assert_allclose(L, [0.25, 0.25])


@given(admissible_states(max_m=1), unit, unit, unit, st.floats(0.1, 3))
def test_gain_loss_conserves_and_matches_oracle(f, a, r, p, eta0):
    row = f[0]
    A = game_table(row.size, a, r, p)
    eta = eta0 * row.sum()
    G, L = gain_loss(row, A, eta)
    assert abs((G - row * L).sum()) <= 1e-12
    np.testing.assert_allclose(G, naive_gain(row, A, eta), atol=1e-15)


def _setup(rng, m, n):
    f = rng.random((m, n))
    f *= rng.random((m, 1)) / f.sum(axis=1, keepdims=True)
    profile = EnvironmentProfile(rng.random(m), float(rng.random()), float(rng.uniform(0.5, 2)))
    phi = interior_limiters(f.sum(axis=1), float(rng.random()), float(rng.random()))
    return f, profile, phi


def test_local_operator_conservative(rng):
    for _ in range(50):
        f, profile, phi = _setup(rng, int(rng.integers(1, 8)), int(rng.integers(2, 8)))
        J = interaction_operator_local(KineticState(f), profile, phi)
        assert np.abs(J.sum(axis=1)).max() <= 1e-12
        np.testing.assert_allclose(interaction_operator(f, profile, phi), J, atol=1e-15)


def test_nonlocal_weights_validation():
    w = NonlocalWeights.uniform([2, 1, 0])
    np.testing.assert_allclose(w.w[0], [1 / 3] * 3)
    assert NonlocalWeights.local(4).mu == (0, 0, 0, 0)
    with pytest.raises(ConfigurationError):
        NonlocalWeights((0, 1), (np.array([1.0]), np.array([0.5, 0.5])))
    with pytest.raises(ConfigurationError):
        NonlocalWeights((1, 0), (np.array([0.6, 0.6]), np.array([1.0])))
    with pytest.raises(ConfigurationError):
        NonlocalWeights((1, 0), (np.array([1.5, -0.5]), np.array([1.0])))


def test_nonlocal_local_limit_is_exact(rng):
    for _ in range(20):
        m, n = int(rng.integers(1, 8)), int(rng.integers(2, 8))
        f, profile, phi = _setup(rng, m, n)
        a = interaction_operator_nonlocal(f, NonlocalWeights.local(m), profile, phi)
        b = interaction_operator_local(f, profile, phi)
        assert np.array_equal(a, b)


def test_nonlocal_matches_direct_summation(rng):
    f = np.array([[0.1, 0.2, 0.05], [0.3, 0.1, 0.4]])
    profile = EnvironmentProfile(np.array([0.6, 0.4]), 0.5, 1.3)
    phi = interior_limiters(f.sum(axis=1), 0.9, 0.8)
    w = NonlocalWeights((1, 0), (np.array([0.5, 0.5]), np.array([1.0])))
    J = interaction_operator_nonlocal(f, w, profile, phi)
    ref = naive_nonlocal(f, profile.alpha, profile.beta, profile.eta0, phi, w.mu, w.w)
    np.testing.assert_allclose(J, ref, atol=1e-15)
    for _ in range(10):
        m, n = int(rng.integers(2, 6)), int(rng.integers(2, 6))
        f, profile, phi = _setup(rng, m, n)
        mu = [int(rng.integers(0, m - i)) for i in range(m)]
        w = NonlocalWeights(mu, [rng.dirichlet(np.ones(k + 1)) for k in mu])
        J = interaction_operator_nonlocal(f, w, profile, phi)
        ref = naive_nonlocal(f, profile.alpha, profile.beta, profile.eta0, phi, w.mu, w.w)
        np.testing.assert_allclose(J, ref, atol=1e-14)


def test_nonlocal_empty_road():
    w = NonlocalWeights.uniform([1, 0])
    J = interaction_operator_nonlocal(np.zeros((2, 3)), w, EnvironmentProfile.uniform(2, 0.5),
                                      np.ones(3))
    assert np.all(J == 0)
