"""Numerical audit of the a priori estimates satisfied by Rothe trajectories.

Inequalities whose constants are explicit are checked step by step.  Where
only existence of a constant is known, the ratio of the left-hand side to
the data-dependent core of the right-hand side is reported, and its
boundedness is judged across a sweep of step counts by :func:`estimate_sweep`.

Notation: ``|v|_alpha^2 = sum_k alpha l_k (P v)_k^2``, ``a(v) = v^T A0 v``,
``J(v) = sum_k l_k j((P v)_k)``, ``F^k`` the right-hand side at ``t_k`` and
``|F|_*`` its dual norm with respect to the energy Gram matrix ``G``.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.sparse.linalg import splu

from ..convex import SolverSettings
from ..errors import NumericError
from ..fem import ProblemData, assemble_energy_gram
from ..metrics import derivative_l2_sigma, relative_drift, relative_growth, trapezoid_weights
from ..mesh import InterfaceMode
from .drivers import run_problem
from .trajectory import RotheTrajectory

_LOGGER = logging.getLogger(__name__)

INTERFACE_BOUND = "interface_bound"
CUMULATIVE_BOUND = "cumulative_energy_bound"
ENERGY_BALANCE = "energy_balance"
DERIVATIVE_BOUND = "derivative_bound"
INTERFACE_CONTRACTION = "interface_contraction"
SUP_DERIVATIVE = "sup_interface_derivative"
SUP_ENERGY_BOUND = "sup_energy_bound"

#: Spread ``(max - min) / min`` of a ratio across a sweep still counted as bounded.
BOUNDED_DRIFT = 0.1

_EXPLICIT_SLACK = 1e-12
_BALANCE_SLACK = 1e-8


@dataclass(frozen=True)
class EstimateRecord:
    """One side-by-side comparison at one step.

    ``rhs_or_ratio`` is the right-hand side for explicit inequalities and the
    ratio LHS / core RHS otherwise; ``passed`` is always true for ratios.
    """

    step: int
    inequality_id: str
    lhs: float
    rhs_or_ratio: float
    passed: bool
    explicit: bool = True


@dataclass(frozen=True)
class EstimateReport:
    """Every inequality evaluated on one trajectory."""

    m: int
    mode: InterfaceMode
    records: Tuple[EstimateRecord, ...]

    @property
    def passes(self) -> bool:
        return all(record.passed for record in self.records)

    def failed(self) -> List[EstimateRecord]:
        return [record for record in self.records if not record.passed]

    def records_for(self, inequality_id: str) -> List[EstimateRecord]:
        return [record for record in self.records if record.inequality_id == inequality_id]

    def inequality_ids(self) -> List[str]:
        return list(dict.fromkeys(record.inequality_id for record in self.records))

    def ratio(self, inequality_id: str) -> float:
        """Largest reported ratio of a generic-constant inequality."""

        records = [r for r in self.records_for(inequality_id) if not r.explicit]
        if not records:
            raise KeyError(f"No ratio records for {inequality_id!r}.")
        return max(record.rhs_or_ratio for record in records)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "step": [r.step for r in self.records],
                "inequality_id": [r.inequality_id for r in self.records],
                "lhs": [r.lhs for r in self.records],
                "rhs_or_ratio": [r.rhs_or_ratio for r in self.records],
                "pass": [bool(r.passed) for r in self.records],
            },
            columns=["step", "inequality_id", "lhs", "rhs_or_ratio", "pass"],
        )


def _ratio(numerator: float, denominator: float) -> float:
    if denominator == 0:
        return 0.0 if numerator == 0 else math.inf
    return numerator / denominator


def _quadratic_forms(matrix, steps: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", steps, np.asarray((matrix @ steps.T).T))


def dual_norms(data: ProblemData, vectors: np.ndarray) -> np.ndarray:
    """``F^T G^{-1} F`` for each row ``F`` of ``vectors``."""

    gram = assemble_energy_gram(data.mesh, data.dofmap, data.beta).tocsc()
    try:
        factor = splu(gram)
    except RuntimeError as exc:
        raise NumericError(f"Energy Gram matrix is singular: {exc}") from exc
    return np.array([float(v @ factor.solve(v)) for v in vectors])


def check_estimates(traj: RotheTrajectory, data: ProblemData) -> EstimateReport:
    """Evaluate every a priori inequality on ``traj``.

    Explicit (per step): ``interface_bound`` and ``cumulative_energy_bound``
    (continuous interface), ``energy_balance`` (both), and
    ``interface_contraction`` when the data vanish.

    Ratios, against ``|F|^2_{L^2(0,T;*)}`` (trapezoid rule) plus the initial
    norm: ``interface_bound`` and ``cumulative_energy_bound`` (bilateral,
    core ``|u0|_alpha^2 + |F|^2``), ``derivative_bound`` and
    ``sup_energy_bound`` (core ``u0^T G u0 + |F|^2``).  The cumulative lhs is
    ``|u^m|_alpha^2`` plus the trapezoid ``L^2(0,T;V)`` norm of the nodal
    values; the sup lhs is ``max_{i >= 1} (u^i)^T G u^i``.
    """

    if traj.mode is not data.mode or traj.n_dofs != data.dofmap.n_dofs or traj.m != data.m:
        raise ValueError("Trajectory does not belong to the given problem data.")
    if not math.isclose(traj.T, data.T, rel_tol=1e-12):
        raise ValueError("Trajectory does not cover [0, T] of the given problem data.")

    m, h = traj.m, traj.h
    steps = traj.steps
    operator = data.smooth_operator
    gram = assemble_energy_gram(data.mesh, data.dofmap, data.beta)
    lengths = data.lengths
    spec = data.jspec

    loads = np.vstack([data.rhs(t) for t in traj.times])
    duals = dual_norms(data, loads)
    alpha_norms = traj.interface_norms(weighted=True)
    energies = _quadratic_forms(operator, steps)
    gram_norms = _quadratic_forms(gram, steps)
    interface = traj.interface_series
    penalties = np.array([spec.total(row, lengths) for row in interface])
    derivative_alpha = np.square(traj.interface_derivatives) @ (data.alpha * lengths)

    cumulative_duals = np.concatenate([[0.0], np.cumsum(duals[1:])]) * h
    weights = trapezoid_weights(m, h)
    data_norm = float(weights @ duals)
    records: List[EstimateRecord] = []

    if data.mode is InterfaceMode.CONTINUOUS:
        coercivity = min(data.sigma_min, 1.0)
        cumulative_gram = np.concatenate([[0.0], np.cumsum(gram_norms[1:])]) * h
        for i in range(1, m + 1):
            rhs = alpha_norms[0] + cumulative_duals[i] / coercivity
            slack = _EXPLICIT_SLACK * (1.0 + abs(rhs))
            lhs = alpha_norms[i]
            records.append(EstimateRecord(i, INTERFACE_BOUND, lhs, rhs, bool(lhs <= rhs + slack)))
            lhs = alpha_norms[i] + coercivity * cumulative_gram[i]
            records.append(EstimateRecord(i, CUMULATIVE_BOUND, lhs, rhs, bool(lhs <= rhs + slack)))
    else:
        core = alpha_norms[0] + data_norm
        for i in range(1, m + 1):
            records.append(
                EstimateRecord(i, INTERFACE_BOUND, alpha_norms[i], _ratio(alpha_norms[i], core), True, False)
            )
        lhs = alpha_norms[m] + float(weights @ gram_norms)
        records.append(EstimateRecord(m, CUMULATIVE_BOUND, lhs, _ratio(lhs, core), True, False))

    work = np.concatenate([[0.0], np.cumsum(np.einsum("ij,ij->i", loads[1:], np.diff(steps, axis=0)))])
    dissipation = np.concatenate([[0.0], np.cumsum(derivative_alpha)]) * h
    initial = 0.5 * energies[0] + penalties[0]
    for i in range(1, m + 1):
        lhs = 0.5 * energies[i] + dissipation[i] + penalties[i]
        rhs = initial + work[i]
        passed = bool(lhs <= rhs + _BALANCE_SLACK * (1.0 + abs(rhs))) if math.isfinite(rhs) else True
        records.append(EstimateRecord(i, ENERGY_BALANCE, lhs, rhs, passed))

    derivative = derivative_l2_sigma(traj.interface_derivatives, lengths, h) ** 2
    core = gram_norms[0] + data_norm
    records.append(EstimateRecord(m, DERIVATIVE_BOUND, derivative, _ratio(derivative, core), True, False))
    sup_energy = float(gram_norms[1:].max(initial=0.0))
    records.append(EstimateRecord(m, SUP_ENERGY_BOUND, sup_energy, _ratio(sup_energy, core), True, False))

    if not np.any(loads):
        for i in range(1, m + 1):
            lhs, rhs = alpha_norms[i], alpha_norms[i - 1]
            passed = bool(lhs <= rhs + _EXPLICIT_SLACK * (1.0 + rhs))
            records.append(EstimateRecord(i, INTERFACE_CONTRACTION, lhs, rhs, passed))

    report = EstimateReport(m=m, mode=data.mode, records=tuple(records))
    for record in report.failed():
        _LOGGER.warning(
            "%s violated at step %d: lhs=%.17g rhs=%.17g",
            record.inequality_id,
            record.step,
            record.lhs,
            record.rhs_or_ratio,
        )
    return report


@dataclass(frozen=True)
class EstimateSweep:
    """Per-``m`` reports and the boundedness verdict of every ratio."""

    step_counts: Tuple[int, ...]
    reports: Tuple[EstimateReport, ...]
    values: Dict[str, Tuple[float, ...]] = field(default_factory=dict)

    def growth(self, key: str) -> float:
        return relative_growth(self.values[key])

    def drift(self, key: str) -> float:
        return relative_drift(self.values[key])

    def bounded(self, key: str) -> bool:
        return self.drift(key) <= BOUNDED_DRIFT

    @property
    def explicit_pass(self) -> bool:
        return all(report.passes for report in self.reports)

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for key, values in self.values.items():
            for m, value in zip(self.step_counts, values):
                rows.append({"m": m, "quantity": key, "value": value})
        frame = pd.DataFrame(rows, columns=["m", "quantity", "value"])
        return frame.sort_values(["quantity", "m"], kind="mergesort").reset_index(drop=True)

    def summary_frame(self) -> pd.DataFrame:
        keys = list(self.values)
        return pd.DataFrame(
            {
                "quantity": keys,
                "growth": [self.growth(key) for key in keys],
                "drift": [self.drift(key) for key in keys],
                "bounded": [self.bounded(key) for key in keys],
            },
            columns=["quantity", "growth", "drift", "bounded"],
        )


def sup_interface_derivative(traj: RotheTrajectory) -> float:
    """``max_i |P Z^i|_{L^2(Gamma)}``."""

    per_step = np.square(traj.interface_derivatives) @ traj.lengths
    return math.sqrt(float(per_step.max(initial=0.0)))


def estimate_sweep(
    data: ProblemData,
    step_counts: Sequence[int],
    settings: Optional[SolverSettings] = None,
    *,
    max_workers: int = 0,
) -> EstimateSweep:
    """Run ``data`` for every ``m`` in ``step_counts`` and collect the ratios.

    ``max_workers > 0`` runs the members on a thread pool; results keep the
    order of ``step_counts``.
    """

    step_counts = tuple(int(m) for m in step_counts)
    if not step_counts:
        raise ValueError("'step_counts' must not be empty.")

    def member(m: int) -> Tuple[EstimateReport, float]:
        problem = data.with_steps(m)
        traj = run_problem(problem, settings)
        return check_estimates(traj, problem), sup_interface_derivative(traj)

    if max_workers > 0:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            outcomes = list(pool.map(member, step_counts))
    else:
        outcomes = [member(m) for m in step_counts]

    reports = tuple(report for report, _ in outcomes)
    values: Dict[str, Tuple[float, ...]] = {}
    for key in reports[0].inequality_ids():
        if any(not r.explicit for r in reports[0].records_for(key)):
            values[key] = tuple(report.ratio(key) for report in reports)
    values[SUP_DERIVATIVE] = tuple(sup for _, sup in outcomes)
    sweep = EstimateSweep(step_counts=step_counts, reports=reports, values=values)
    for key in values:
        _LOGGER.debug("%s across m=%s: growth=%.4f drift=%.4f", key, step_counts, sweep.growth(key), sweep.drift(key))
    return sweep


__all__ = [
    "INTERFACE_BOUND",
    "CUMULATIVE_BOUND",
    "ENERGY_BALANCE",
    "DERIVATIVE_BOUND",
    "INTERFACE_CONTRACTION",
    "SUP_DERIVATIVE",
    "SUP_ENERGY_BOUND",
    "BOUNDED_DRIFT",
    "EstimateRecord",
    "EstimateReport",
    "EstimateSweep",
    "check_estimates",
    "dual_norms",
    "estimate_sweep",
    "sup_interface_derivative",
]
