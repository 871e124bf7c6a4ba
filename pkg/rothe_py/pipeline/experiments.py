"""Experiments driven by a :class:`RunConfig`, keyed by ``[experiment] kind``."""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, MutableMapping, Optional, Type

import numpy as np
import pandas as pd

from ..data import interface_frame, trajectory_frame
from ..fem import ProblemData, build_problem, poincare_estimate
from ..mesh import BidomainMesh, InterfaceMode, build_dof_map, build_inclusion_mesh, build_strip_mesh
from ..metrics import observed_orders, trajectory_distance
from ..rothe import check_estimates, compatibility_residual, estimate_sweep, regularity_diagnostics, run_problem
from ..thinlayer import convergence_study
from .base import Operator
from .config import RunConfig

_LOGGER = logging.getLogger(__name__)

THREADS_ENV = "ROTHE_THREADS"


def worker_count() -> int:
    """Thread cap from ``ROTHE_THREADS``; 0 (sequential) when unset or invalid."""

    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 0
    try:
        return max(int(raw), 0)
    except ValueError:
        _LOGGER.warning("Ignoring %s=%r: not an integer.", THREADS_ENV, raw)
        return 0


@dataclass
class ExperimentResult:
    """Tables written by an experiment, keyed by file name, plus scalar findings."""

    kind: str
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    summary: MutableMapping[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        """Return a JSON-serialisable representation of the result."""
        return {
            "kind": self.kind,
            "summary": dict(self.summary),
            "tables": {name: frame.to_dict(orient="records") for name, frame in self.tables.items()},
        }


def build_mesh(config: RunConfig) -> BidomainMesh:
    domain = config.domain
    if domain.geometry == "strip":
        return build_strip_mesh(domain.nx1, domain.nx2, domain.ny)
    return build_inclusion_mesh(domain.n)


def build_data(config: RunConfig) -> ProblemData:
    """Sample the configured problem on its mesh."""

    bilateral = config.mode is InterfaceMode.BILATERAL
    return build_problem(
        build_mesh(config),
        config.mode,
        sigma1=config.coefficients.sigma1,
        sigma2=config.coefficients.sigma2,
        alpha=config.coefficients.alpha,
        beta=0.0 if bilateral else config.coefficients.beta,
        jspec=config.j.build(),
        f=config.source.f,
        g=config.source.g if bilateral else None,
        S=config.initial.S,
        T=config.time.T,
        m=config.time.m,
        settings=config.solver.settings(),
    )


class Experiment(Operator[RunConfig, ExperimentResult]):
    kind: str = ""

    def __init__(self, max_workers: Optional[int] = None) -> None:
        super().__init__()
        self.max_workers = worker_count() if max_workers is None else max_workers

    def process(self, data: RunConfig) -> ExperimentResult:  # type: ignore[override]
        _LOGGER.info("Running %s experiment", self.kind)
        self._results = self.run(data)
        _LOGGER.info("Finished %s experiment: %s", self.kind, dict(self._results.summary))
        return self._results

    def run(self, config: RunConfig) -> ExperimentResult:
        raise NotImplementedError


class SingleRunExperiment(Experiment):
    """One Rothe run with its trajectory, interface series and estimate audit."""

    kind = "wentzell"

    def run(self, config: RunConfig) -> ExperimentResult:
        data = build_data(config)
        traj = run_problem(data, config.solver.settings())
        report = check_estimates(traj, data)
        failed = report.failed()
        if failed:
            _LOGGER.warning("%d explicit estimate checks failed", len(failed))
        return ExperimentResult(
            kind=config.experiment.kind,
            tables={
                "trajectory.csv": trajectory_frame(traj),
                "interface.csv": interface_frame(traj, data.mesh),
                "estimates.csv": report.to_frame(),
            },
            summary={
                "m": data.m,
                "n_dofs": data.dofmap.n_dofs,
                "estimates_pass": report.passes,
                "sweeps": int(sum(traj.sweeps)),
            },
        )


class SignoriniExperiment(SingleRunExperiment):
    kind = "signorini"


class MSweepExperiment(Experiment):
    """Distances of coarse runs to a fine reference run on the same mesh."""

    kind = "msweep"

    def run(self, config: RunConfig) -> ExperimentResult:
        settings = config.solver.settings()
        counts = list(config.experiment.m_list)
        reference_steps = config.experiment.reference_steps
        data = build_data(config)
        reference = run_problem(data.with_steps(reference_steps), settings)

        def member(m: int):
            return trajectory_distance(run_problem(data.with_steps(m), settings), reference)

        distances = _map(member, counts, self.max_workers)
        errors = [distance.l2_sigma for distance in distances]
        orders = np.concatenate([[np.nan], observed_orders(counts, errors)])
        frame = pd.DataFrame(
            {
                "m": counts,
                "h": [data.T / m for m in counts],
                "distance_L2Sigma": errors,
                "max_interface": [distance.max_interface for distance in distances],
                "observed_order": orders,
            },
            columns=["m", "h", "distance_L2Sigma", "max_interface", "observed_order"],
        )
        monotone = bool(np.all(np.diff(errors) <= 0))
        return ExperimentResult(
            kind=self.kind,
            tables={"convergence.csv": frame},
            summary={"m_reference": reference_steps, "monotone": monotone},
        )


class ThinLayerExperiment(Experiment):
    """Band averages of the thin-layer problem against the interface trace."""

    kind = "thinlayer"

    def run(self, config: RunConfig) -> ExperimentResult:
        study = convergence_study(
            build_data(config),
            config.experiment.eps_list,
            gamma=config.experiment.gamma,
            settings=config.solver.settings(),
            max_workers=self.max_workers,
        )
        return ExperimentResult(
            kind=self.kind,
            tables={"thinlayer.csv": study.to_frame()},
            summary={"n": study.n, "m": study.m, "strictly_decreasing": study.strictly_decreasing},
        )


class EstimatesExperiment(Experiment):
    """Estimate audit over ``m_list`` plus the regularity diagnostics of the configured run."""

    kind = "estimates"

    def run(self, config: RunConfig) -> ExperimentResult:
        settings = config.solver.settings()
        data = build_data(config)
        sweep = estimate_sweep(data, config.experiment.m_list, settings, max_workers=self.max_workers)
        residual = compatibility_residual(data, seed=config.experiment.seed)
        regularity = regularity_diagnostics(run_problem(data, settings), data, residual=residual)
        per_step = pd.concat(
            [report.to_frame().assign(m=m) for m, report in zip(sweep.step_counts, sweep.reports)],
            ignore_index=True,
        )
        per_step = per_step[["m", "step", "inequality_id", "lhs", "rhs_or_ratio", "pass"]]
        return ExperimentResult(
            kind=self.kind,
            tables={
                "estimates.csv": per_step,
                "estimate_ratios.csv": sweep.to_frame(),
                "estimate_summary.csv": sweep.summary_frame(),
                "regularity.csv": regularity.to_frame(),
            },
            summary={
                "explicit_pass": sweep.explicit_pass,
                "compatibility_residual": residual,
                "guaranteed": regularity.guaranteed,
                "bounded": {key: sweep.bounded(key) for key in sweep.values},
            },
        )


class PoincareExperiment(Experiment):
    """Discrete Poincare constant of the bilateral space on refined inclusion meshes."""

    kind = "poincare"

    def run(self, config: RunConfig) -> ExperimentResult:
        sizes = list(config.experiment.n_list)

        def member(n: int):
            mesh = build_inclusion_mesh(n)
            return poincare_estimate(mesh, build_dof_map(mesh, InterfaceMode.BILATERAL))

        estimates = _map(member, sizes, self.max_workers)
        constants = [estimate.constant for estimate in estimates]
        frame = pd.DataFrame(
            {
                "n": sizes,
                "constant": constants,
                "eigenvalue": [estimate.eigenvalue for estimate in estimates],
                "iterations": [estimate.iterations for estimate in estimates],
            },
            columns=["n", "constant", "eigenvalue", "iterations"],
        )
        spread = max(constants) / min(constants) - 1.0
        return ExperimentResult(kind=self.kind, tables={"poincare.csv": frame}, summary={"relative_spread": spread})


def _map(function: Callable[[Any], Any], items: List[Any], max_workers: int) -> List[Any]:
    if max_workers > 0:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(function, items))
    return [function(item) for item in items]


EXPERIMENTS: Dict[str, Type[Experiment]] = {
    "wentzell": SingleRunExperiment,
    "signorini": SignoriniExperiment,
    "msweep": MSweepExperiment,
    "thinlayer": ThinLayerExperiment,
    "estimates": EstimatesExperiment,
    "poincare": PoincareExperiment,
}


def make_experiment(kind: str, max_workers: Optional[int] = None) -> Experiment:
    if kind not in EXPERIMENTS:
        raise KeyError(f"Unknown experiment kind: {kind!r}")
    return EXPERIMENTS[kind](max_workers)


def run_experiment(config: RunConfig, max_workers: Optional[int] = None) -> ExperimentResult:
    return make_experiment(config.experiment.kind, max_workers).process(config)


__all__ = [
    "EXPERIMENTS",
    "Experiment",
    "ExperimentResult",
    "build_data",
    "build_mesh",
    "make_experiment",
    "run_experiment",
    "worker_count",
]
