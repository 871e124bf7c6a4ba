"""Compatibility of the initial state and time-derivative diagnostics."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from ..convex import SolverSettings
from ..fem import ProblemData, stationary_solution
from .trajectory import RotheTrajectory

_LOGGER = logging.getLogger(__name__)

#: Residual below which the initial state counts as compatible.
COMPATIBILITY_TOLERANCE = 1e-9


def stationary_state(data: ProblemData, settings: Optional[SolverSettings] = None) -> np.ndarray:
    """Minimizer of ``1/2 a(u) - F(0)^T u + J(u)``: the compatible initial state."""

    return stationary_solution(data.mesh, data.dofmap, data.smooth_operator, data.rhs(0.0), data.jspec, settings)


def compatibility_residual(
    data: ProblemData,
    *,
    samples: int = 200,
    seed: int = 0,
    scales: Sequence[float] = (1.0, 1e-3),
) -> float:
    """Largest violation of the stationary inequality at ``t = 0`` over sampled directions.

    For a unit direction ``z`` and scale ``s`` the trial point ``v = u0 + s z``
    contributes ``max(0, -(g^T (v - u0) + J(v) - J(u0)) / s)`` with
    ``g = A0 u0 - F(0)``.  Directions are ``samples`` random unit vectors plus
    the coordinate vectors with both signs.
    """

    u0 = np.asarray(data.u0, dtype=float)
    n = len(u0)
    gradient = data.smooth_operator @ u0 - data.rhs(0.0)
    selector = data.selector
    lengths = data.lengths
    spec = data.jspec
    base = spec.total(selector @ u0, lengths)
    if not math.isfinite(base):
        return math.inf

    rng = np.random.default_rng(seed)
    random = rng.standard_normal((samples, n))
    random /= np.linalg.norm(random, axis=1, keepdims=True)
    directions = np.vstack([random, np.eye(n), -np.eye(n)])

    slopes = directions @ gradient
    traces = np.asarray((selector @ directions.T).T)
    start = selector @ u0
    worst = 0.0
    for scale in scales:
        values = np.asarray(spec.value(start[None, :] + scale * traces), dtype=float)
        with np.errstate(invalid="ignore"):
            penalties = values @ lengths
        change = slopes + (penalties - base) / scale
        finite = np.isfinite(change)
        if np.any(finite):
            worst = max(worst, float(np.max(-change[finite], initial=0.0)))
    return worst


@dataclass(frozen=True)
class RegularityReport:
    """Per-step time-derivative norms with the compatibility verdict.

    ``guaranteed`` is false when the initial state is incompatible or the
    functional lacks quadratic growth; the norms are then informational.
    """

    times: np.ndarray
    interface_norms: np.ndarray
    energy_norms: np.ndarray
    residual: float
    compatible: bool
    guaranteed: bool

    @property
    def sup_interface(self) -> float:
        return float(self.interface_norms.max(initial=0.0))

    @property
    def sup_energy(self) -> float:
        return float(self.energy_norms.max(initial=0.0))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "step": np.arange(1, len(self.interface_norms) + 1),
                "t": self.times[1:],
                "interface_norm": self.interface_norms,
                "energy_norm": self.energy_norms,
            },
            columns=["step", "t", "interface_norm", "energy_norm"],
        )


def regularity_diagnostics(
    traj: RotheTrajectory, data: ProblemData, *, residual: Optional[float] = None, seed: int = 0
) -> RegularityReport:
    """``|P Z^i|_{L^2(Gamma)}`` and ``a(Z^i)^{1/2}`` at every step."""

    if residual is None:
        residual = compatibility_residual(data, seed=seed)
    compatible = residual <= COMPATIBILITY_TOLERANCE
    guaranteed = compatible and data.jspec.has_quadratic_growth
    if not compatible:
        _LOGGER.warning("Initial state is not compatible (residual %.3e); diagnostics not guaranteed.", residual)
    elif not data.jspec.has_quadratic_growth:
        _LOGGER.warning("Functional %r lacks quadratic growth; diagnostics are flagged.", data.jspec.kind)

    derivatives = traj.derivatives
    interface = np.sqrt(np.square(traj.interface_derivatives) @ traj.lengths)
    operator = data.smooth_operator
    energy = np.sqrt(np.maximum(np.einsum("ij,ij->i", derivatives, np.asarray((operator @ derivatives.T).T)), 0.0))
    return RegularityReport(
        times=np.asarray(traj.times),
        interface_norms=interface,
        energy_norms=energy,
        residual=float(residual),
        compatible=bool(compatible),
        guaranteed=bool(guaranteed),
    )


__all__ = [
    "COMPATIBILITY_TOLERANCE",
    "RegularityReport",
    "compatibility_residual",
    "regularity_diagnostics",
    "stationary_state",
]
