"""Run configuration and the operator base class.

Experiments live in :mod:`rothe_py.pipeline.experiments`; they depend on the
solvers, which themselves build on :class:`Operator`.
"""

from .base import Operator
from .config import (
    EXPERIMENT_KINDS,
    CoefficientConfig,
    DomainConfig,
    ExperimentConfig,
    FunctionalConfig,
    InitialConfig,
    OutputConfig,
    RunConfig,
    SolverConfig,
    SourceConfig,
    TimeConfig,
    format_config,
    load_config,
    parse_config,
)

__all__ = [
    "Operator",
    "EXPERIMENT_KINDS",
    "CoefficientConfig",
    "DomainConfig",
    "ExperimentConfig",
    "FunctionalConfig",
    "InitialConfig",
    "OutputConfig",
    "RunConfig",
    "SolverConfig",
    "SourceConfig",
    "TimeConfig",
    "format_config",
    "load_config",
    "parse_config",
]
