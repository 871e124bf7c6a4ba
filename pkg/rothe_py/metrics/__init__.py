"""Space-time norms and sweep statistics."""

from .core import (
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

__all__ = [
    "TrajectoryDistance",
    "derivative_l2_sigma",
    "observed_orders",
    "relative_drift",
    "relative_growth",
    "series_l2_sigma",
    "trajectory_distance",
    "trajectory_norms",
    "trapezoid_weights",
]
