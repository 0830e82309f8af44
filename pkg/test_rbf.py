"""
Tests for Gaussian RBF networks, layouts and the leakage weight law
"""
import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from modules.integrator import rk4_step
from modules.rbf import (
    AdaptiveWeights,
    RbfBank,
    RbfLayout,
    approximate,
    basis,
    default_layout,
    grid_layout,
    leakage_rate,
    scattered_layout,
    weight_update_rate,
)
from shared.errors import ShapeError
from shared.schema import RbfSection


def single_node(center=0.0, width=1.0):
    return RbfLayout(centers=[[center]], widths=[width])


def test_basis_at_center_and_one_width_away():
    layout = RbfLayout(centers=[[0.0, 0.0], [1.0, 1.0]], widths=[1.0, 2.0])
    phi = basis(layout, [1.0, 1.0])
    assert phi[1] == 1.0
    phi = basis(layout, [1.0, 0.0])
    assert phi[0] == pytest.approx(math.exp(-1.0))
    np.testing.assert_array_equal(basis(single_node(), [0.0]), [1.0])


def test_basis_is_positive_and_bounded():
    rng = np.random.default_rng(5)
    for _ in range(100):
        dim = int(rng.integers(1, 5))
        layout = RbfLayout(centers=rng.uniform(-2, 2, size=(7, dim)), widths=rng.uniform(0.5, 3, size=7))
        phi = basis(layout, rng.uniform(-3, 3, size=dim))
        assert np.all(phi > 0.0) and np.all(phi <= 1.0)


def test_layout_validation():
    with pytest.raises(ShapeError):
        RbfLayout(centers=[[0.0]], widths=[0.0])
    with pytest.raises(ShapeError):
        RbfLayout(centers=[[0.0], [1.0]], widths=[1.0])
    with pytest.raises(ShapeError):
        RbfLayout(centers=[[np.inf]], widths=[1.0])
    with pytest.raises(ShapeError):
        basis(single_node(), [0.0, 1.0])


def test_approximate():
    layout = single_node()
    assert approximate(layout, AdaptiveWeights.zeros(layout), [0.4]) == 0.0
    assert approximate(layout, np.array([2.0]), [0.0]) == 2.0
    with pytest.raises(ShapeError):
        approximate(layout, np.zeros(2), [0.0])


def test_approximate_is_linear_in_weights():
    layout = grid_layout(2, (-2.0, 2.0), 5)
    rng = np.random.default_rng(9)
    w1, w2 = rng.normal(size=25), rng.normal(size=25)
    x = [0.3, -1.1]
    combined = approximate(layout, 2.0 * w1 - 0.5 * w2, x)
    assert combined == pytest.approx(2.0 * approximate(layout, w1, x) - 0.5 * approximate(layout, w2, x))


def test_least_squares_fit_of_sine():
    """Test that 11 Gaussian nodes can represent sin on [-1, 1]"""
    layout = grid_layout(1, (-1.0, 1.0), 11)
    train = np.linspace(-1, 1, 101)
    Phi = np.array([basis(layout, [x]) for x in train])
    weights, *_ = np.linalg.lstsq(Phi, np.sin(train), rcond=None)
    grid = np.linspace(-1, 1, 201)
    errors = [abs(approximate(layout, weights, [x]) - math.sin(x)) for x in grid]
    assert max(errors) < 0.05


def test_weight_update_rate_values():
    layout = single_node()
    rate = weight_update_rate(np.zeros(1), layout, [0.0], tau_tilde=1.0, h=50, eta=0.01, kappa=2)
    assert rate[0] == pytest.approx(-0.02)
    rate = weight_update_rate(np.array([1.0]), layout, [0.0], tau_tilde=0.0, h=50, eta=0.01, kappa=2)
    assert rate[0] == pytest.approx(-50.0)


def test_leakage_decay_matches_exponential():
    layout = grid_layout(1, (-2.0, 2.0), 11)
    w0 = np.linspace(-1.0, 1.0, 11)
    h, dt = 50.0, 0.001

    def rhs(t, w):
        return weight_update_rate(w, layout, [0.2], tau_tilde=0.0, h=h, eta=0.01, kappa=2.0)

    w = w0.copy()
    for k in range(100):
        w = rk4_step(rhs, k * dt, w, dt)
    expected = np.linalg.norm(w0) * math.exp(-h * 100 * dt)
    assert np.linalg.norm(w) == pytest.approx(expected, rel=1e-6)


def test_default_layouts():
    settings = RbfSection()
    one = default_layout(1, settings, (0, 0, 1))
    assert one.node_count == 11
    assert one.widths[0] == pytest.approx(0.4)
    two = default_layout(2, settings, (0, 0, 2))
    assert two.node_count == 25
    assert two.widths[0] == pytest.approx(1.0)
    many = default_layout(6, settings, (0, 0, 1))
    assert many.node_count == 30 and many.input_dim == 6
    assert np.all(many.centers >= -2.0) and np.all(many.centers <= 2.0)
    np.testing.assert_array_equal(many.widths, np.full(30, 2.0))


def test_scattered_layout_is_deterministic():
    a = scattered_layout(4, (-2.0, 2.0), 30, 2.0, (0, 1, 1))
    b = scattered_layout(4, (-2.0, 2.0), 30, 2.0, (0, 1, 1))
    c = scattered_layout(4, (-2.0, 2.0), 30, 2.0, (0, 2, 1))
    np.testing.assert_array_equal(a.centers, b.centers)
    assert not np.array_equal(a.centers, c.centers)


def test_bank_matches_per_layout_basis():
    layouts = [scattered_layout(4, (-2.0, 2.0), 30, 2.0, (0, i, 1, 1)) for i in range(3)]
    bank = RbfBank.stack(layouts)
    assert bank.node_count == 30
    inputs = np.random.default_rng(6).uniform(-2, 2, size=(3, 4))
    stacked = bank.basis(inputs)
    for a, layout in enumerate(layouts):
        np.testing.assert_allclose(stacked[a], basis(layout, inputs[a]), rtol=1e-12)


def test_bank_rejects_mismatched_layouts():
    with pytest.raises(ShapeError):
        RbfBank.stack([grid_layout(1, (-2.0, 2.0), 11), grid_layout(2, (-2.0, 2.0), 5)])


def test_stacked_leakage_rate_matches_single_rows():
    layout = grid_layout(1, (-2.0, 2.0), 11)
    w = np.random.default_rng(8).normal(size=(2, 11))
    phis = np.array([basis(layout, [0.3]), basis(layout, [-1.1])])
    stacked = leakage_rate(w, phis, np.array([0.5, -2.0]), 50.0, 0.01, 2.0)
    for a, (x, tau) in enumerate(((0.3, 0.5), (-1.1, -2.0))):
        np.testing.assert_allclose(stacked[a], weight_update_rate(w[a], layout, [x], tau, 50.0, 0.01, 2.0))
