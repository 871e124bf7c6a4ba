"""Discrete space-time norms of Rothe trajectories.

Time integrals use the composite trapezoid rule on the trajectory nodes and
interface integrals the lumped node weights, so the ``L^2(Sigma)`` norm of a
series ``v`` is ``sqrt(sum_i c_i h sum_k l_k v_ik^2)`` with trapezoid
coefficients ``c``.  Trajectories on nested time grids are compared on the
nodes of the coarser one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Dict, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

if TYPE_CHECKING:
    from ..rothe.trajectory import RotheTrajectory

ExactInterface = Callable[[float], np.ndarray]


@dataclass(frozen=True)
class TrajectoryDistance:
    """Distances between two trajectories on their common time nodes."""

    l2_sigma: float
    max_interface: float
    energy: Optional[float] = None

    def __post_init__(self) -> None:
        if self.l2_sigma < 0 or self.max_interface < 0:
            raise ValueError("Distances must be non-negative")

    def as_dict(self) -> Dict[str, float]:
        payload = {"l2_sigma": self.l2_sigma, "max_interface": self.max_interface}
        if self.energy is not None:
            payload["energy"] = self.energy
        return payload


def _safe_ratio(numerator: float, denominator: float, *, zero: float = 0.0) -> float:
    if denominator == 0:
        return zero
    return numerator / denominator


def trapezoid_weights(m: int, h: float) -> np.ndarray:
    weights = np.full(m + 1, h)
    weights[[0, -1]] = 0.5 * h
    return weights


def series_l2_sigma(series: np.ndarray, lengths: np.ndarray, h: float) -> float:
    """``L^2(0, T; L^2(Gamma))`` norm of an interface series of shape ``(m + 1, K)``."""

    series = np.asarray(series, dtype=float)
    per_step = np.square(series) @ np.asarray(lengths, dtype=float)
    return math.sqrt(float(trapezoid_weights(len(series) - 1, h) @ per_step))


def derivative_l2_sigma(derivatives: np.ndarray, lengths: np.ndarray, h: float) -> float:
    """``L^2(Sigma)`` norm of a derivative series (piecewise constant in time)."""

    per_step = np.square(np.asarray(derivatives, dtype=float)) @ np.asarray(lengths, dtype=float)
    return math.sqrt(h * float(per_step.sum()))


def _stride(fine: RotheTrajectory, coarse: RotheTrajectory) -> int:
    if fine.m % coarse.m != 0:
        raise ValueError(f"Time grids with m={fine.m} and m={coarse.m} are not nested.")
    if not math.isclose(fine.T, coarse.T, rel_tol=1e-12):
        raise ValueError("Trajectories cover different time intervals.")
    return fine.m // coarse.m


def trajectory_distance(
    traj_a: RotheTrajectory,
    traj_b: Union[RotheTrajectory, ExactInterface],
    *,
    gram: Optional[sp.spmatrix] = None,
) -> TrajectoryDistance:
    """Distance between two trajectories, or between one and an exact interface solution.

    ``traj_b`` may be a callable ``t -> interface values``.  With ``gram``
    given, the ``L^2(0, T; energy)`` distance of the full DOF vectors is
    added (both trajectories must share the DOF numbering).
    """

    if not hasattr(traj_b, "interface_series"):
        series_a = traj_a.interface_series
        series_b = np.vstack([np.asarray(traj_b(t), dtype=float) for t in traj_a.times])
        if series_b.shape != series_a.shape:
            raise ValueError("Exact solution must return one value per interface node.")
        difference = series_a - series_b
        return TrajectoryDistance(
            l2_sigma=series_l2_sigma(difference, traj_a.lengths, traj_a.h),
            max_interface=float(np.max(np.abs(difference), initial=0.0)),
        )

    coarse, fine = (traj_a, traj_b) if traj_a.m <= traj_b.m else (traj_b, traj_a)
    stride = _stride(fine, coarse)
    if coarse.n_dofs != fine.n_dofs or len(coarse.lengths) != len(fine.lengths):
        raise ValueError("Trajectories live on different discretizations.")
    difference = coarse.interface_series - fine.interface_series[::stride]
    energy = None
    if gram is not None:
        steps = coarse.steps - fine.steps[::stride]
        per_step = np.einsum("ij,ij->i", steps, np.asarray((gram @ steps.T).T))
        energy = math.sqrt(max(float(trapezoid_weights(coarse.m, coarse.h) @ per_step), 0.0))
    return TrajectoryDistance(
        l2_sigma=series_l2_sigma(difference, coarse.lengths, coarse.h),
        max_interface=float(np.max(np.abs(difference), initial=0.0)),
        energy=energy,
    )


def trajectory_norms(
    traj_a: RotheTrajectory,
    traj_b: Union[RotheTrajectory, ExactInterface, None] = None,
    *,
    gram: Optional[sp.spmatrix] = None,
) -> Dict[str, float]:
    """Norms of ``traj_a`` alone, or of its difference with ``traj_b``."""

    if traj_b is not None:
        return trajectory_distance(traj_a, traj_b, gram=gram).as_dict()
    payload = {
        "l2_sigma": series_l2_sigma(traj_a.interface_series, traj_a.lengths, traj_a.h),
        "max_interface": float(np.max(np.abs(traj_a.interface_series), initial=0.0)),
        "derivative_l2_sigma": derivative_l2_sigma(traj_a.interface_derivatives, traj_a.lengths, traj_a.h),
    }
    if gram is not None:
        per_step = np.einsum("ij,ij->i", traj_a.steps, np.asarray((gram @ traj_a.steps.T).T))
        payload["energy"] = math.sqrt(max(float(trapezoid_weights(traj_a.m, traj_a.h) @ per_step), 0.0))
    return payload


def observed_orders(step_counts: Sequence[int], errors: Sequence[float]) -> np.ndarray:
    """``log2``-type convergence orders between consecutive refinements."""

    counts = np.asarray(step_counts, dtype=float)
    errors = np.asarray(errors, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(errors[:-1] / errors[1:]) / np.log(counts[1:] / counts[:-1])


def relative_drift(values: Sequence[float], *, atol: float = 1e-14) -> float:
    """``max / min - 1`` over a sweep; zero when every value vanishes."""

    values = np.abs(np.asarray(values, dtype=float))
    if len(values) == 0 or float(values.max()) <= atol:
        return 0.0
    return _safe_ratio(float(values.max()), float(values.min()), zero=math.inf) - 1.0


def relative_growth(values: Sequence[float], *, atol: float = 1e-14) -> float:
    """Largest ``value / first`` over a sweep; one when every value vanishes."""

    values = np.abs(np.asarray(values, dtype=float))
    if len(values) == 0 or float(values.max()) <= atol:
        return 1.0
    return _safe_ratio(float(values.max()), float(values[0]), zero=math.inf)


__all__ = [
    "TrajectoryDistance",
    "trapezoid_weights",
    "series_l2_sigma",
    "derivative_l2_sigma",
    "trajectory_distance",
    "trajectory_norms",
    "observed_orders",
    "relative_drift",
    "relative_growth",
]
