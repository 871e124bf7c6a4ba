"""Rothe time stepping for the Wentzell and Signorini transmission problems.

Every step solves the convex problem

    min 1/2 u^T (A0 + (1/h) P^T W P) u - (F(t_{i+1}) + (1/h) P^T W P u^i)^T u
        + sum_k l_k j((P u)_k)

with ``A0`` the stationary operator, ``P`` the trace (Wentzell) or jump
(Signorini) selector, ``W = diag(alpha l)`` and ``F`` sampled at the right
end of the step.  The matrix depends only on ``h``, so one solver is
factorized per run and reused for every step.
"""
from __future__ import annotations

import logging
import time
from abc import abstractmethod
from typing import ClassVar, Dict, List, Optional

import numpy as np
import scipy.sparse as sp

from ..convex import ProximalGaussSeidel, SolverSettings
from ..errors import CoercivityError, ModeError
from ..fem import ProblemData, SparseSpdSystem
from ..mesh import InterfaceMode
from ..pipeline.base import Operator
from .trajectory import RotheTrajectory

_LOGGER = logging.getLogger(__name__)


class RotheScheme(Operator[ProblemData, RotheTrajectory]):
    """Base class of the time-stepping drivers.

    Subclasses fix the interface mode and may override the operator hooks
    (``operator``, ``dynamic_selector``, ``mass_weights``, ``j_weights``,
    ``rhs``) to discretize other dynamic terms with the same stepping loop.
    """

    mode: ClassVar[InterfaceMode]

    def __init__(self, settings: Optional[SolverSettings] = None) -> None:
        super().__init__()
        self.settings = settings or SolverSettings()
        self._solvers: Dict[float, ProximalGaussSeidel] = {}
        self._data: Optional[ProblemData] = None

    # ------------------------------------------------------------------
    # Hooks
    # ------------------------------------------------------------------
    def operator(self, data: ProblemData) -> sp.csr_matrix:
        return data.smooth_operator

    def dynamic_selector(self, data: ProblemData) -> sp.csr_matrix:
        return data.selector

    def mass_weights(self, data: ProblemData) -> np.ndarray:
        return data.interface_weights

    def j_weights(self, data: ProblemData) -> np.ndarray:
        return data.lengths

    def rhs(self, data: ProblemData, t: float) -> np.ndarray:
        return data.rhs(t)

    @abstractmethod
    def check_step(self, data: ProblemData, h: float) -> None:
        """Reject step sizes the per-step problem cannot handle."""

    # ------------------------------------------------------------------
    # Stepping
    # ------------------------------------------------------------------
    def _bind(self, data: ProblemData) -> None:
        if data.mode is not self.mode:
            raise ModeError(f"{type(self).__name__} needs a {self.mode.value} DOF map, got {data.mode.value}.")
        if self._data is not data:
            self._data = data
            self._solvers = {}

    def dynamic_gram(self, data: ProblemData, h: float) -> sp.csr_matrix:
        P = self.dynamic_selector(data)
        return (P.T @ sp.diags(self.mass_weights(data) / h) @ P).tocsr()

    def system(self, data: ProblemData, u_prev: np.ndarray, h: float, t_next: float) -> SparseSpdSystem:
        """Assemble the per-step problem explicitly."""

        self._bind(data)
        gram = self.dynamic_gram(data, h)
        return SparseSpdSystem(
            A=(self.operator(data) + gram).tocsr(),
            b=self.rhs(data, t_next) + gram @ np.asarray(u_prev, dtype=float),
            interface_weights=self.mass_weights(data),
            selector=self.dynamic_selector(data),
            j_weights=self.j_weights(data),
        )

    def solver(self, data: ProblemData, h: float) -> ProximalGaussSeidel:
        self._bind(data)
        if h not in self._solvers:
            self.check_step(data, h)
            matrix = (self.operator(data) + self.dynamic_gram(data, h)).tocsr()
            self._solvers[h] = ProximalGaussSeidel(
                matrix, self.j_weights(data), self.dynamic_selector(data), data.jspec, self.settings
            )
        return self._solvers[h]

    def step(self, data: ProblemData, u_prev: np.ndarray, h: float, t_next: float) -> np.ndarray:
        """Advance one step of size ``h`` from ``u_prev`` to ``t_next``."""

        if not h > 0:
            raise ValueError("'h' must be positive.")
        solver = self.solver(data, h)
        u_prev = np.asarray(u_prev, dtype=float)
        b = self.rhs(data, t_next) + self.dynamic_gram(data, h) @ u_prev
        return solver.solve(b, x0=u_prev).values

    def process(self, data: ProblemData) -> RotheTrajectory:  # type: ignore[override]
        self._bind(data)
        self.check_steps(data)
        h = data.h
        solver = self.solver(data, h)
        gram = self.dynamic_gram(data, h)
        times = data.times

        steps: List[np.ndarray] = [np.array(data.u0, dtype=float)]
        sweeps: List[int] = []
        started = time.perf_counter()
        for i in range(data.m):
            b = self.rhs(data, times[i + 1]) + gram @ steps[-1]
            solution = solver.solve(b, x0=steps[-1])
            steps.append(solution.values)
            sweeps.append(solution.sweeps)
            _LOGGER.debug("step %d/%d: %d sweeps, energy=%.17g", i + 1, data.m, solution.sweeps, solution.energy)
        _LOGGER.debug(
            "%s run with m=%d finished in %.3fs", type(self).__name__, data.m, time.perf_counter() - started
        )

        self._results = RotheTrajectory(
            times=times,
            steps=np.vstack(steps),
            mode=data.mode,
            selector=data.selector,
            lengths=data.lengths,
            alpha=data.alpha,
            sweeps=tuple(sweeps),
        )
        return self._results

    def check_steps(self, data: ProblemData) -> None:
        self.check_step(data, data.h)


class WentzellScheme(RotheScheme):
    """Continuous interface with dynamic condition ``alpha d_t u - beta Delta_Gamma u + dj(u)``."""

    mode = InterfaceMode.CONTINUOUS

    def check_step(self, data: ProblemData, h: float) -> None:
        return None


class SignoriniScheme(RotheScheme):
    """Bilateral interface: flux jump ``g`` and dynamics of ``[u]`` through ``dj``.

    The per-step form is coercive only for ``h <= alpha_min / sigma_min``.
    """

    mode = InterfaceMode.BILATERAL

    def check_step(self, data: ProblemData, h: float) -> None:
        threshold = data.alpha_min / data.sigma_min
        if h > threshold * (1.0 + 1e-12):
            minimal = data.minimal_signorini_steps
            raise CoercivityError(
                f"Step size h={h!r} exceeds alpha_min/sigma_min={threshold!r}; "
                f"use at least m={minimal} steps for T={data.T!r}.",
                minimal,
            )

    def check_steps(self, data: ProblemData) -> None:
        if data.m * data.alpha_min < data.sigma_min * data.T * (1.0 - 1e-12):
            raise CoercivityError(
                f"m={data.m} is below sigma_min*T/alpha_min={data.sigma_min * data.T / data.alpha_min!r}; "
                f"the minimal admissible m is {data.minimal_signorini_steps}.",
                data.minimal_signorini_steps,
            )
        self.check_step(data, data.h)


def wentzell_step(
    u_prev: np.ndarray, data: ProblemData, h: float, t_next: float, settings: Optional[SolverSettings] = None
) -> np.ndarray:
    return WentzellScheme(settings).step(data, u_prev, h, t_next)


def signorini_step(
    u_prev: np.ndarray, data: ProblemData, h: float, t_next: float, settings: Optional[SolverSettings] = None
) -> np.ndarray:
    return SignoriniScheme(settings).step(data, u_prev, h, t_next)


def run_wentzell(data: ProblemData, settings: Optional[SolverSettings] = None) -> RotheTrajectory:
    return WentzellScheme(settings).process(data)


def run_signorini(data: ProblemData, settings: Optional[SolverSettings] = None) -> RotheTrajectory:
    return SignoriniScheme(settings).process(data)


def run_problem(data: ProblemData, settings: Optional[SolverSettings] = None) -> RotheTrajectory:
    """Dispatch on the interface mode of ``data``."""

    if data.mode is InterfaceMode.CONTINUOUS:
        return run_wentzell(data, settings)
    return run_signorini(data, settings)


def interface_kkt_residual(system: SparseSpdSystem, u: np.ndarray, jspec, atol: float = 1e-10) -> np.ndarray:
    """Per-node violation of ``r_k in l_k dj((P u)_k)`` for ``r = b - A u``.

    The multiplier is read on the ``+1`` coordinate of each selector row; on
    a bilateral row the ``-1`` coordinate must carry the opposite value, and
    its mismatch is included.
    """

    u = np.asarray(u, dtype=float)
    residual = system.residual(u)
    P = system.selector.tocsr()
    selected = P @ u
    violation = np.zeros(P.shape[0])
    for k in range(P.shape[0]):
        start, end = P.indptr[k], P.indptr[k + 1]
        columns, coefficients = P.indices[start:end], P.data[start:end]
        plus = columns[coefficients > 0][0]
        weight = system.j_weights[k]
        multiplier = residual[plus] / weight
        distance = weight * float(jspec.subgradient_distance(selected[k], multiplier, atol=atol))
        balance = float(abs(residual[columns].sum())) if len(columns) > 1 else 0.0
        violation[k] = max(distance, balance)
    return violation


__all__ = [
    "RotheScheme",
    "WentzellScheme",
    "SignoriniScheme",
    "wentzell_step",
    "signorini_step",
    "run_wentzell",
    "run_signorini",
    "run_problem",
    "interface_kkt_residual",
]
