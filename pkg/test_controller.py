"""
Tests for virtual control laws, first-order filters, the Θ̂ law and NN input assembly
"""
from dataclasses import fields
import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from modules.controller import (
    ControllerGains,
    ControllerState,
    assemble_nn_input,
    boundary_layer_error,
    filter_derivative,
    first_law,
    nn_input_dim,
    rate_feedforward,
    step_law,
    theta_rates,
    theta_update_rate,
    virtual_control_1,
    virtual_control_k,
)
from modules.graph import build_topology
from modules.integrator import rk4_step
from shared.errors import ConfigError, ShapeError


@pytest.fixture
def gains():
    return ControllerGains(r=[-100, -100], c=[100, 100], eta=[0.01, 0.01], h=[50, 50],
                           m=[0.005], lam=120, o=25)


@pytest.fixture
def single():
    return build_topology([[0]], [1])


def test_first_virtual_control(gains, single):
    assert virtual_control_1(gains, single, 0, 0.4, 0.0, [0.3, 0.7]) == pytest.approx(-40.2)
    assert virtual_control_1(gains, single, 0, 0.0, 12.0, [1.0, 1.0]) == 0.0


def test_first_virtual_control_divides_by_degree(gains):
    topo = build_topology([[0, 1], [0, 0]], [1, 1])
    assert topo.gain(0) == 2.0
    assert virtual_control_1(gains, topo, 0, 0.4, 0.0, [1.0]) == pytest.approx(-20.1)


def test_first_virtual_control_is_linear_in_z(gains, single):
    """Test that α_2 scales with z_1 for fixed Θ̂ and basis"""
    basis = np.array([0.2, 0.9, 0.4])
    values = [virtual_control_1(gains, single, 0, z, 3.0, basis) for z in (-1.0, 0.5, 2.0)]
    slopes = [v / z for v, z in zip(values, (-1.0, 0.5, 2.0))]
    assert slopes == pytest.approx([slopes[0]] * 3)
    assert slopes[0] < 0


def test_damping_term_opposes_error(gains, single):
    basis = np.ones(4)
    plain = virtual_control_1(gains, single, 0, 0.4, 0.0, basis)
    damped = virtual_control_1(gains, single, 0, 0.4, 5000.0, basis)
    assert damped < plain
    assert plain - damped == pytest.approx(5000.0 / (2 * 100 ** 2) * 0.4 * 4.0)


def test_later_virtual_control(gains):
    assert virtual_control_k(gains, 2, 1.0, 0.0, [0.5], 0.3, 0.3, 0.0, 0.5) == pytest.approx(-100.5)
    assert virtual_control_k(gains, 2, 0.0, 0.0, [0.0], 0.0, 0.0, 0.1, 0.5) == pytest.approx(-0.05)
    assert virtual_control_k(gains, 2, 0.0, 0.0, [0.0], 0.0, 0.0, 0.0, 0.5) == 0.0


def test_later_virtual_control_filter_feedforward(gains):
    """Test the (α − ᾱ)/m term"""
    value = virtual_control_k(gains, 2, 0.0, 0.0, [0.0], 1.0, 0.0, 0.0, 0.5)
    assert value == pytest.approx(200.0)


def test_later_virtual_control_step_range(gains):
    with pytest.raises(ShapeError):
        virtual_control_k(gains, 1, 0.0, 0.0, [0.0], 0.0, 0.0, 0.0, 0.5)
    with pytest.raises(ShapeError):
        virtual_control_k(gains, 3, 0.0, 0.0, [0.0], 0.0, 0.0, 0.0, 0.5)


def test_filter_derivative_values():
    assert filter_derivative(0.005, 0.0, 1.0) == pytest.approx(200.0)
    assert filter_derivative(0.005, 0.7, 0.7) == 0.0


def test_filter_step_response_matches_closed_form():
    m, alpha, dt = 0.005, 1.0, 1e-5
    alpha_bar = np.zeros(1)
    steps = int(round(m / dt))
    for k in range(steps):
        alpha_bar = rk4_step(lambda t, y: np.array([filter_derivative(m, y[0], alpha)]),
                             k * dt, alpha_bar, dt)
    assert alpha_bar[0] == pytest.approx(1.0 - math.exp(-1.0), abs=1e-9)
    assert alpha_bar[0] == pytest.approx(0.632, abs=1e-3)


def test_theta_update_rate(gains):
    assert theta_update_rate(gains, 0.0, [1.0, 0.0], [1.0, 3.0]) == pytest.approx(0.00125)
    assert theta_update_rate(gains, 1.0, [0.0, 0.0], [1.0, 1.0]) == pytest.approx(-120.0)
    with pytest.raises(ShapeError):
        theta_update_rate(gains, 0.0, [1.0], [1.0])


def test_theta_stays_nonnegative_from_zero(gains):
    """Test that Θ̂ starting at 0 never goes negative under the leakage law"""
    rng = np.random.default_rng(4)
    theta, dt = 0.0, 1e-3
    for _ in range(500):
        z = rng.normal(size=2)
        norms = rng.uniform(0, 5, size=2)
        theta = rk4_step(lambda t, y: np.array([theta_update_rate(gains, y[0], z, norms)]),
                         0.0, np.array([theta]), dt)[0]
        assert theta >= 0.0


def test_boundary_layer_error():
    np.testing.assert_array_equal(boundary_layer_error([1.5], [1.0]), [0.5])
    state = ControllerState(alpha_bar=np.array([0.2]))
    np.testing.assert_allclose(state.boundary_layer_errors([0.5]), [-0.3])


def test_gain_validation():
    base = dict(r=[-100, -100], c=[100, 100], eta=[0.01, 0.01], h=[50, 50], m=[0.005], lam=120, o=25)
    with pytest.raises(ConfigError):
        ControllerGains(**{**base, "r": [-100, 5]})
    with pytest.raises(ConfigError):
        ControllerGains(**{**base, "m": [0.0]})
    with pytest.raises(ConfigError):
        ControllerGains(**{**base, "lam": 0.0})
    with pytest.raises(ShapeError):
        ControllerGains(**{**base, "m": [0.005, 0.005]})
    with pytest.raises(ShapeError):
        ControllerGains(**{**base, "c": [100]})


def test_nn_input_dimensions():
    assert nn_input_dim(1, 0) == 4
    assert nn_input_dim(1, 1) == 6
    assert nn_input_dim(2, 1) == 10
    empty = assemble_nn_input(1, 0.0, 0.0, 0.0, [0.0], [], [0.0], [])
    np.testing.assert_array_equal(empty, np.zeros(4))
    one = assemble_nn_input(1, 0.1, -2.0, 9.0, [0.3], [[0.5]], [1.7], [[1.2]])
    np.testing.assert_array_equal(one, [0.1, -2.0, 0.3, 0.5, 1.7, 1.2])


def test_nn_input_layout_for_later_steps():
    """Test that steps after the first carry Θ̂ in place of ẏ_r"""
    vec = assemble_nn_input(2, 0.1, -2.0, 9.0, [0.3, 1.7], [[0.5, 0.6], [0.7, 0.8]],
                            [1.0, 2.0], [[3.0, 4.0], [5.0, 6.0]], neighbor_ids=[0, 2])
    assert vec.shape == (nn_input_dim(2, 2),)
    np.testing.assert_array_equal(vec, [0.1, 9.0, 0.3, 1.7, 0.5, 0.6, 0.7, 0.8,
                                        1.0, 2.0, 3.0, 4.0, 5.0, 6.0])


def test_nn_input_errors():
    with pytest.raises(ShapeError):
        assemble_nn_input(2, 0.0, 0.0, 0.0, [0.0], [], [0.0, 0.0], [])
    with pytest.raises(ShapeError):
        assemble_nn_input(1, 0.0, 0.0, 0.0, [0.0], [[0.0]], [0.0], [])
    with pytest.raises(ShapeError):
        assemble_nn_input(1, 0.0, 0.0, 0.0, [0.0], [[0.0], [1.0]], [0.0], [[0.0], [1.0]],
                          neighbor_ids=[2, 1])


# ============================================================================
# Rate compensation and batched laws
# ============================================================================

def test_feedforward_is_additive(gains, single):
    assert virtual_control_1(gains, single, 0, 0.4, 0.0, [0.3, 0.7], feedforward=0.7) == pytest.approx(-39.5)
    assert virtual_control_k(gains, 2, 1.0, 0.0, [0.5], 0.3, 0.3, 0.0, 0.5,
                             feedforward=-1.0) == pytest.approx(-101.5)


def test_rate_feedforward_hand_example():
    topo = build_topology([[0, 1], [0, 0]], [0, 1])
    f_hat = np.array([[0.1, 0.2], [0.3, 0.4]])
    varpi_hat = np.array([[1.0, -1.0], [0.0, 0.5]])
    terms = rate_feedforward(topo, np.array([0.5, 2.0]), 3.0, f_hat, varpi_hat)
    np.testing.assert_allclose(terms, [[0.9, 0.8], [2.7, -0.9]])
    # inputs are left untouched
    np.testing.assert_array_equal(f_hat, [[0.1, 0.2], [0.3, 0.4]])


def test_batched_laws_match_scalar_laws(gains):
    topo = build_topology([[0, 1], [1, 0]], [1, 0])
    z1 = np.array([0.4, -0.2])
    theta = np.array([0.0, 30.0])
    energy = np.array([1.5, 0.25])
    ff = np.array([0.2, -0.1])
    batched = first_law(gains, topo.in_degree + topo.pinning, z1, theta, energy, ff)
    for a in range(2):
        basis = np.array([math.sqrt(energy[a]), 0.0])
        assert batched[a] == pytest.approx(virtual_control_1(gains, topo, a, z1[a], theta[a], basis, ff[a]))

    z2 = np.array([1.0, -0.5])
    alpha, alpha_bar, psi1 = np.array([0.3, 2.0]), np.array([0.3, 1.9]), np.array([0.0, 0.01])
    stepped = step_law(gains, 2, z2, theta, energy, alpha, alpha_bar, psi1, 0.5, ff)
    for a in range(2):
        expected = virtual_control_k(gains, 2, z2[a], theta[a], [math.sqrt(energy[a])],
                                     alpha[a], alpha_bar[a], psi1[a], 0.5, ff[a])
        assert stepped[a] == pytest.approx(expected)

    z = np.array([[1.0, 0.0], [0.5, -0.2]])
    norms = np.array([[1.0, 3.0], [2.0, 0.5]])
    rates = theta_rates(gains, theta, z, norms)
    for a in range(2):
        assert rates[a] == pytest.approx(theta_update_rate(gains, theta[a], z[a], norms[a]))


def test_compensation_defaults_on(gains):
    assert gains.compensate
    plain = ControllerGains(r=[-100], c=[100], eta=[0.01], h=[50], m=[], lam=120, o=25, compensate=False)
    assert not plain.compensate


def test_controller_state_holds_only_integrated_signals():
    assert [f.name for f in fields(ControllerState)] == ["alpha_bar", "theta_hat", "w_hats"]
