from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.sparse as sp

from rothe_py.mesh import InterfaceMode
from rothe_py.metrics import (
    TrajectoryDistance,
    derivative_l2_sigma,
    observed_orders,
    relative_drift,
    relative_growth,
    series_l2_sigma,
    trajectory_distance,
    trajectory_norms,
    trapezoid_weights,
)
from rothe_py.rothe import RotheTrajectory

LENGTHS = np.array([0.25, 0.5, 0.25])


def linear_trajectory(m: int, slope: float = 1.0, T: float = 1.0) -> RotheTrajectory:
    """Three interface DOFs carrying ``slope * t`` exactly."""

    times = np.linspace(0.0, T, m + 1)
    steps = np.outer(slope * times, np.ones(3))
    return RotheTrajectory(
        times=times,
        steps=steps,
        mode=InterfaceMode.CONTINUOUS,
        selector=sp.identity(3, format="csr"),
        lengths=LENGTHS,
        alpha=2.0,
    )


def test_trapezoid_weights_integrate_constants() -> None:
    weights = trapezoid_weights(8, 0.125)
    assert weights.sum() == pytest.approx(1.0)
    assert weights[0] == weights[-1] == pytest.approx(0.0625)


def test_series_norm_of_a_constant() -> None:
    series = np.full((5, 3), 2.0)
    assert series_l2_sigma(series, LENGTHS, 0.25) == pytest.approx(2.0)


def test_derivative_norm_is_piecewise_constant_in_time() -> None:
    derivatives = np.full((4, 3), 3.0)
    assert derivative_l2_sigma(derivatives, LENGTHS, 0.25) == pytest.approx(3.0)


def test_interface_norms_apply_alpha() -> None:
    traj = linear_trajectory(4)
    np.testing.assert_allclose(traj.interface_norms(), 2.0 * traj.times**2)
    np.testing.assert_allclose(traj.interface_norms(weighted=False), traj.times**2)
    np.testing.assert_allclose(traj.interface_derivatives, 1.0)


def test_distance_to_itself_vanishes() -> None:
    traj = linear_trajectory(4)
    distance = trajectory_distance(traj, traj)
    assert distance == TrajectoryDistance(0.0, 0.0, None)


def test_distance_is_measured_on_the_coarse_nodes() -> None:
    coarse = linear_trajectory(4, slope=1.0)
    fine = linear_trajectory(8, slope=2.0)
    distance = trajectory_distance(coarse, fine)
    assert distance.max_interface == pytest.approx(1.0)
    assert distance == trajectory_distance(fine, coarse)


def test_distance_with_an_energy_gram() -> None:
    traj = linear_trajectory(2)
    shifted = RotheTrajectory(
        times=traj.times,
        steps=traj.steps + 1.0,
        mode=traj.mode,
        selector=traj.selector,
        lengths=traj.lengths,
        alpha=traj.alpha,
    )
    distance = trajectory_distance(traj, shifted, gram=sp.identity(3))
    assert distance.l2_sigma == pytest.approx(1.0)
    assert distance.energy == pytest.approx(math.sqrt(3.0))


def test_distance_rejects_non_nested_grids() -> None:
    with pytest.raises(ValueError):
        trajectory_distance(linear_trajectory(3), linear_trajectory(4))
    with pytest.raises(ValueError):
        trajectory_distance(linear_trajectory(4), linear_trajectory(8, T=2.0))


def test_distance_to_an_exact_interface_solution() -> None:
    traj = linear_trajectory(4)
    distance = trajectory_distance(traj, lambda t: np.full(3, t))
    assert distance.l2_sigma == pytest.approx(0.0)
    with pytest.raises(ValueError):
        trajectory_distance(traj, lambda t: np.zeros(2))


def test_norms_of_a_single_trajectory() -> None:
    norms = trajectory_norms(linear_trajectory(4))
    assert norms["max_interface"] == pytest.approx(1.0)
    assert norms["derivative_l2_sigma"] == pytest.approx(1.0)
    # trapezoid rule on t^2 over [0, 1] with h = 1/4
    assert norms["l2_sigma"] == pytest.approx(math.sqrt(11.0 / 32.0))


def test_observed_orders_of_first_order_errors() -> None:
    counts = [8, 16, 32, 64]
    errors = [1.0 / m for m in counts]
    np.testing.assert_allclose(observed_orders(counts, errors), 1.0)


def test_relative_drift_and_growth() -> None:
    assert relative_drift([2.0, 3.0, 2.5]) == pytest.approx(0.5)
    assert relative_growth([2.0, 3.0, 2.5]) == pytest.approx(1.5)
    assert relative_growth([4.0, 3.0, 2.0]) == pytest.approx(1.0)
    assert relative_drift([0.0, 0.0]) == 0.0
    assert relative_growth([0.0, 0.0]) == 1.0
    assert relative_growth([0.0, 1.0]) == math.inf
