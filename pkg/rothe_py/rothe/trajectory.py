"""Rothe sequences: step functions, piecewise-linear interpolants and discrete derivatives."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
import scipy.sparse as sp

from ..mesh import InterfaceMode


@dataclass(frozen=True)
class RotheTrajectory:
    """Solutions ``u^0 .. u^m`` on the uniform grid ``t_i = i h``.

    ``selector`` maps a DOF vector to its interface trace (continuous) or
    jump (bilateral); ``lengths`` are the lumped interface weights used for
    ``L^2(Gamma)`` norms and ``alpha`` scales the dynamic norm.
    """

    times: np.ndarray
    steps: np.ndarray
    mode: InterfaceMode
    selector: sp.csr_matrix
    lengths: np.ndarray
    alpha: float
    sweeps: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        times = np.array(self.times, dtype=float, copy=True)
        steps = np.array(self.steps, dtype=float, copy=True)
        if steps.ndim != 2 or steps.shape[0] != len(times):
            raise ValueError("'steps' must hold one DOF vector per time node.")
        if len(times) < 2:
            raise ValueError("A trajectory needs at least two time nodes.")
        times.setflags(write=False)
        steps.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "lengths", np.asarray(self.lengths, dtype=float))
        object.__setattr__(self, "mode", InterfaceMode.coerce(self.mode))

    @property
    def m(self) -> int:
        return len(self.times) - 1

    @property
    def h(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def T(self) -> float:
        return float(self.times[-1])

    @property
    def n_dofs(self) -> int:
        return int(self.steps.shape[1])

    @property
    def interface_series(self) -> np.ndarray:
        """Trace or jump at every interface node, shape ``(m + 1, K)``."""

        return np.asarray((self.selector @ self.steps.T).T)

    @property
    def derivatives(self) -> np.ndarray:
        """``Z^i = (u^i - u^{i-1}) / h`` for ``i = 1..m``."""

        return np.diff(self.steps, axis=0) / self.h

    @property
    def interface_derivatives(self) -> np.ndarray:
        """Trace (``Z``) or jump (``U``) derivatives, shape ``(m, K)``."""

        return np.diff(self.interface_series, axis=0) / self.h

    def interface_norms(self, weighted: bool = True) -> np.ndarray:
        """Per-step ``sum_k w_k v_k^2`` with ``w = alpha * lengths`` (or ``lengths``)."""

        weights = self.alpha * self.lengths if weighted else self.lengths
        return np.square(self.interface_series) @ weights

    def _locate(self, t: float) -> Tuple[int, float]:
        if t < -1e-12 or t > self.T + 1e-12:
            raise ValueError(f"t={t!r} outside [0, {self.T}].")
        position = min(max(t, 0.0), self.T) / self.h
        nearest = round(position)
        if abs(position - nearest) <= 1e-12 * max(1.0, position):
            position = float(nearest)
        i = min(int(np.floor(position)), self.m - 1)
        return i, position - i

    def interpolate(self, t: float) -> np.ndarray:
        """Piecewise-linear Rothe function ``u_m(t)``; equals ``u^i`` at ``t_i``."""

        i, theta = self._locate(t)
        if theta == 0.0:
            return self.steps[i].copy()
        if theta == 1.0:
            return self.steps[i + 1].copy()
        return (1.0 - theta) * self.steps[i] + theta * self.steps[i + 1]

    def step_function(self, t: float) -> np.ndarray:
        """Step function: ``u^i`` on ``(t_{i-1}, t_i]``, extended to ``t = 0`` by ``u^1``."""

        i, theta = self._locate(t)
        if i == 0 and theta == 0.0:
            return self.steps[1].copy()
        return self.steps[i + 1 if theta > 0.0 else i].copy()


__all__ = ["RotheTrajectory"]
